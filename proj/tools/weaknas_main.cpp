#include <iostream>

#include "weaknas/cli.hpp"

int main(int argc, char** argv) { return weaknas::cli::run(argc, argv, std::cout, std::cerr); }
