// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace memgen::cli {

// Dispatches one command. Returns 0 on success, 1 on validation/usage
// errors, 2 on runtime failures; errors are reported as one JSON line on
// stderr.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace memgen::cli
