#pragma once

#include <string>

#include "linlam/term.hpp"

namespace linlam {

// Surface-syntax printer with minimal parentheses; parse(pretty(e)) is
// alpha-equal to e for any parseable e. Terms containing quantum variables
// or unannotated lambdas (both arise only during evaluation) still print,
// but are not re-parseable source text.
std::string pretty(const TermPtr& t);

} // namespace linlam
