//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_CLI_H_
#define OODSCORE_CLI_H_

#include <iosfwd>

namespace oodscore {

enum ExitCode {
  kExitOk = 0,
  kExitValidation = 1,
  kExitPrerequisite = 2,
  kExitRuntime = 3,
};

// Runs one command line (argv[0] is the program name) and returns the
// process exit code. Never throws.
int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err);

}  // namespace oodscore

#endif  // OODSCORE_CLI_H_
