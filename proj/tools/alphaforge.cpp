#include <iostream>

#include "alphaforge/cli.hpp"

int main(int argc, char** argv) { return alphaforge::run_command(argc, argv, std::cout, std::cerr); }
