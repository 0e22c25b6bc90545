#include <iostream>

#include "prmrl/cli.hpp"

int main(int argc, char** argv) { return prmrl::cli::run(argc, argv, std::cout, std::cerr); }
