// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#include "usolv/certifier.hpp"

int main(int argc, char** argv) { return usolv::run_cli(argc, argv); }
