#include <iostream>

#include "sfd/cli/cli.hpp"

int main(int argc, char** argv) { return sfd::cli::run(argc, argv, std::cout, std::cerr); }
