#include <iostream>

#include "dmic/cli.hpp"

int main(int argc, char** argv) { return dmic::run_cli(argc, argv, std::cout, std::cerr); }
