#include <iostream>

#include "amsod/cli.hpp"

int main(int argc, char** argv) { return amsod::cli::run(argc, argv, std::cout, std::cerr); }
