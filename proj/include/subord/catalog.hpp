#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "subord/bernstein.hpp"

namespace subord::catalog {

// Bernstein functions addressable by string id. Every entry is returned
// normalized (phi(1) = 1).
//
//   identity                 x
//   stable:a                 x^a,                                 0 < a < 1
//   log2                     log(1+x) / log 2
//   stable-log:a:b           x^a log^b(1+x) / log^b 2,            0 < a < 1, 0 <= b < 1-a
//   stable-invlog:a:b        x^a log^{-b}(1+x) / log^{-b} 2,      0 < b < a < 1
//   rational:a               2^a x (1+x)^{-a},                    0 < a < 1
//   nonconcave               x^2 (not Bernstein; fault injection only)

/// Throws DomainError naming the violated domain for bad ids or parameters.
BernsteinFunction make(std::string_view id);

/// The standard set used by the verification suites.
std::vector<std::string> standard_ids();

/// Standard entries that have a nontrivial Levy measure.
std::vector<std::string> levy_ids();

}  // namespace subord::catalog
