// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/cli.hpp"

int main(int argc, char** argv) { return memgen::cli::run(argc, argv); }
