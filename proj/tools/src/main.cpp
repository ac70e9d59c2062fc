#include <iostream>

#include "gandalf/cli.hpp"

int main(int argc, char** argv) { return gandalf::cli::run(argc, argv, std::cout, std::cerr); }
