#include <iostream>

#include "qobs/app/cli.hpp"

int main(int argc, char** argv) { return qobs::app::run_cli(argc, argv, std::cout, std::cerr); }
