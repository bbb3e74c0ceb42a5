#include "sparseplq/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sparseplq::cli::run(argc, argv, std::cout, std::cerr); }
