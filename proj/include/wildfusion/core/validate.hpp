#pragma once

#include <string>
#include <vector>

#include "wildfusion/core/types.hpp"

namespace wf {

/// Checks every Frame invariant and returns one short coded string per
/// violation (empty means well-formed). Never throws on bad data.
std::vector<std::string> validate_frame(const Frame& frame);

/// Checks QuerySample kind/field invariants against a table.
std::vector<std::string> validate_sample(const QuerySample& s,
                                         const SemanticTable& table,
                                         double surface_epsilon = 1e-4);

}  // namespace wf
