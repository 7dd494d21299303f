#include <iostream>

#include "thetafay/cli.hpp"

int main(int argc, char** argv) { return thetafay::run_cli(argc, argv, std::cout, std::cerr); }
