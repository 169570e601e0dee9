#include <iostream>

#include "ppsd/cli/commands.hpp"

int main(int argc, char** argv) { return ppsd::cli::run_cli(argc, argv, std::cout, std::cerr); }
