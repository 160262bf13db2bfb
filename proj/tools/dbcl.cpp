#include <iostream>

#include "dbcl/cli_commands.hpp"

int main(int argc, char** argv) { return dbcl::run_cli(argc, argv, std::cout, std::cerr); }
