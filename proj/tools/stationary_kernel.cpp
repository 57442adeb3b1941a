#include "stationary/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return stationary::run_cli(argc, argv, std::cout, std::cerr); }
