// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "atlas/commands.hpp"

int main(int argc, char** argv) { return atlas::cli::run_cli(argc, argv, std::cout, std::cerr); }
