//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>

#include "oodscore/cli.h"

int main(int argc, char **argv) {
  return oodscore::run_cli(argc, argv, std::cout, std::cerr);
}
