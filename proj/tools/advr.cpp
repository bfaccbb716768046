#include <iostream>

#include "advr/cli.hpp"

int main(int argc, char **argv) { return advr::cli::run(argc, argv, std::cout, std::cerr); }
