#pragma once

#include <set>
#include <string>

#include "linlam/term.hpp"

namespace linlam {

// Names usable as gates in source text (uppercase identifiers followed by
// <...>). Variables must start with a lowercase letter, so the two never
// collide.
std::set<std::string> builtin_gate_names();

// Parses a term of the selected calculus.
//
//   e ::= \x:T. e | e f | if e then f else g | let <x,y> = e in f
//       | <e, f> | tt | ff | omega | e (+) f
//       | meas(e) | new(e) | G<e1, ..., en> | [.]
//
// Comments run from -- to end of line. Application is left-associative and
// binds tightest; (+) is left-associative and binds loosest; \ / if / let
// extend as far right as possible.
//
// Desugaring performed here:
//   <e,f> with a non-value component     => (\x.\y.<x,y>) e f
//   meas/new/G applied to a non-value    => (\x:T. op(x)) e  with T the
//                                           operand type of the operation
//   G<e1,...,en> with n > 1              => G applied to the (possibly
//                                           desugared) right-nested pair
//
// Binder names are made unique (Barendregt) by renaming duplicates.
// Constructs outside the selected mode raise ModeError; [.] parses in any
// mode (contexts) and is rejected by typecheck/eval of plain terms.
TermPtr parse(const std::string& text, Mode mode,
              const std::set<std::string>& gate_names = builtin_gate_names());

// Parses a type: bool | qbit | T -o T | T * T, -o right-associative, *
// right-associative and binding tighter than -o. qbit requires quantum mode.
TypePtr parse_type(const std::string& text, Mode mode);

} // namespace linlam
