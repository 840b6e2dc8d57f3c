// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#include "owc/cli.hpp"

int main(int argc, char** argv) { return owc::run_cli(argc, argv); }
