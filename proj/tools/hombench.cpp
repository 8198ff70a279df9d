#include <iostream>

#include "hom/harness.hpp"

int main(int argc, char** argv) { return hom::harness::run_cli(argc, argv, std::cout, std::cerr); }
