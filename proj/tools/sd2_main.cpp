#include <iostream>

#include "sd2_cli.hpp"

int main(int argc, char** argv) { return sd2::cli::run(argc, argv, std::cout, std::cerr); }
