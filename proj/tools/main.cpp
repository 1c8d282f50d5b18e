// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/cli.hpp"

int main(int argc, char** argv) { return whisperconv::run(argc, argv); }
