#include "kpl/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return kpl::cli::run_cli(argc, argv, std::cout, std::cerr); }
