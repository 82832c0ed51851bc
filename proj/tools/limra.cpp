#include <iostream>

#include "limra/cli.hpp"

int main(int argc, char** argv) { return limra::cli::run(argc, argv, std::cout, std::cerr); }
