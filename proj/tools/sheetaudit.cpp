#include "sheetaudit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sheetaudit::run_cli(argc, argv, std::cout, std::cerr); }
