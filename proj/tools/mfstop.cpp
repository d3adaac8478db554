// SPDX-License-Identifier: MIT
#include <iostream>

#include "cli/commands.hpp"

int main(int argc, char** argv) { return mfstop::cli::run_cli(argc, argv, std::cout, std::cerr); }
