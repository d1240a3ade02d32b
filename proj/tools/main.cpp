#include <iostream>

#include "eet/cli.hpp"

int main(int argc, char** argv) { return eet::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
