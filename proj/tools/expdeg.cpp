#include <iostream>

#include "expdeg/cli.hpp"

int main(int argc, char** argv) { return expdeg::run_cli(argc, argv, std::cout, std::cerr); }
