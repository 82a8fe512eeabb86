#pragma once

#include <iosfwd>
#include <map>

#include "sporadic/lmi.hpp"

namespace sporadic {

/// SDPA sparse format (.dat-s): header (#vars, #blocks, block sizes with
/// negative sizes for diagonal blocks), objective line, then
/// "var block i j value" upper-triangle entries. Semantics: minimize c'x
/// s.t. sum_i x_i F_i - F_0 >= 0, so each constraint C + sum x_k A_k <= 0
/// maps to F_0 = C, F_k = -A_k. Values printed with %.17g so re-parsing the
/// emission reconstructs the problem exactly. Throws on empty constraints.
std::string export_sdpa(const LmiProblem& problem);

/// Inverse of export_sdpa up to variable labels ("x1".."xm") and lost
/// matrix-block/metadata bookkeeping.
LmiProblem import_sdpa(std::istream& in);
LmiProblem import_sdpa_string(const std::string& text);

/// Whitespace-separated "label value" lines keyed by VarId label.
VectorXd import_solution_point(const LmiProblem& problem, std::istream& in);

}  // namespace sporadic
