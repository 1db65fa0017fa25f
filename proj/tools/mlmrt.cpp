#include <iostream>

#include "mlmrt/cli.hpp"

int main(int argc, char** argv) { return mlmrt::run_cli(argc, argv, std::cout, std::cerr); }
