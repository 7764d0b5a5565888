#include <iostream>

#include "pinv/cli.hpp"

int main(int argc, char** argv) { return pinv::run_cli(argc, argv, std::cout, std::cerr); }
