#include <iostream>

#include "hisq/cli.hpp"

int main(int argc, char** argv) { return hisq::cli::run(argc, argv, std::cout, std::cerr); }
