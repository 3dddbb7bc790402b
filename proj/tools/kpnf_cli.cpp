#include <iostream>

#include "kpnf/cli.hpp"

int main(int argc, char** argv) { return kpnf::run_cli(argc, argv, std::cout, std::cerr); }
