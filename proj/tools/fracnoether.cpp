#include "fracnoether/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return fracnoether::cli::main(argc, argv, std::cout, std::cerr); }
