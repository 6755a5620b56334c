#include <iostream>

#include "xfer/cli/cli.hpp"

int main(int argc, char** argv) { return xfer::cli::dispatch(argc, argv, std::cout, std::cerr); }
