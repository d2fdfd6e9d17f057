#include "intact/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return intact::cli::run(argc, argv, std::cout, std::cerr); }
