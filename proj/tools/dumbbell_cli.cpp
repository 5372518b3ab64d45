#include <iostream>

#include "dumbbell/cli.hpp"

int main(int argc, char** argv) { return dumbbell::run_cli(argc, argv, std::cout, std::cerr); }
