#include <iostream>

#include "ncs/cli.hpp"

int main(int argc, char** argv) { return ncs::cli::run_cli(argc, argv, std::cout, std::cerr); }
