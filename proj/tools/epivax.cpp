#include <iostream>

#include "epivax/cli.hpp"

int main(int argc, char** argv) { return epivax::run_cli(argc, argv, std::cout, std::cerr); }
