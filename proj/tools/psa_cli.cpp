#include <iostream>

#include "psa/cli.hpp"

int main(int argc, char** argv) { return psa::run_cli(argc, argv, std::cout, std::cerr); }
