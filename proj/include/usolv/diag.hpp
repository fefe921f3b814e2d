// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef USOLV_DIAG_HPP
#define USOLV_DIAG_HPP

#include <string>
#include <vector>

namespace usolv {

struct SourceSpan {
    int line = 0;  // 1-based; 0 means "no location"
    int col = 0;
};

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string message;
    SourceSpan span;

    std::string render() const;
};

using Diagnostics = std::vector<Diagnostic>;

inline bool has_errors(const Diagnostics& ds) {
    for (const auto& d : ds)
        if (d.severity == Severity::Error) return true;
    return false;
}

std::string render_all(const Diagnostics& ds);

}  // namespace usolv

#endif
