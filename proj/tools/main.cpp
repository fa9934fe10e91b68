#include <iostream>

#include "sfhreg/cli.hpp"

int main(int argc, char** argv) { return sfhreg::run_cli(argc, argv, std::cout, std::cerr); }
