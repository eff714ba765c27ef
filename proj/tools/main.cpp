#include <iostream>

#include "bacsum/cli.hpp"

int main(int argc, char** argv) { return bacsum::cli_main(argc, argv, std::cout, std::cerr); }
