// Prints I_2..I_k with their lowered moment forms and conservation status.
//
//     print_laws [k]

#include "kpl/lawgen.hpp"
#include "kpl/momentcheck.hpp"

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv) {
  const int k_max = argc > 1 ? std::atoi(argv[1]) : 4;
  if (k_max < 2) {
    std::fprintf(stderr, "k must be at least 2\n");
    return 2;
  }
  kpl::LawCache cache;
  kpl::Lowerer lowerer;
  for (int k = 2; k <= k_max; ++k) {
    const auto inv = kpl::gen_invariant(k, cache);
    const auto cert = kpl::certify_invariant(inv, lowerer);
    std::printf("I_%d = %s\n", k, kpl::render_law(inv).c_str());
    std::printf("    = %s\n", lowerer.lower_invariant(inv).to_string().c_str());
    std::printf("    conserved: %s (%zu terms before cancellation)\n\n", cert.verified ? "yes" : "no",
                cert.term_count_before_cancellation);
  }
}
