// Integrates a random eight-mode trajectory at dt, dt/2, dt/4 in quad precision
// and prints the drift of I_2..I_4 with the observed convergence orders.

#include "kpl/lawgen.hpp"
#include "kpl/sim.hpp"

#include <cstdio>

int main() {
  using namespace kpl::sim;
  const auto sys = ModeSystem::default_layout(8, 1.0, 1.0);
  const auto init = random_initial_state(sys, 7, 6);
  std::vector<NamedInvariant> invs;
  for (int k = 2; k <= 4; ++k) invs.push_back({"I_" + std::to_string(k), kpl::gen_invariant(k)});

  const auto study = convergence_study(sys, init, 1.0, 1e-3, 2, invs, kpl::Precision::Quad);
  for (const auto& r : study.runs) {
    std::printf("dt=%-10g", r.dt);
    for (std::size_t i = 0; i < invs.size(); ++i) std::printf("  %s=%.3e", invs[i].name.c_str(), r.drift[i]);
    std::printf("\n");
  }
  for (std::size_t i = 0; i < invs.size(); ++i)
    std::printf("order %s = %.3f\n", invs[i].name.c_str(), study.fitted_order[i]);
}
