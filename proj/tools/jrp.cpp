#include <iostream>

#include "jrp/cli.hpp"

int main(int argc, char** argv) { return jrp::cli::run(argc, argv, std::cout, std::cerr); }
