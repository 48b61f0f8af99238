#pragma once

#include <vector>

namespace tcdet {

// Minimum-cost assignment of rows to columns via shortest augmenting paths.
// Requires rows <= columns and finite costs; every row ends up assigned.
// Returns the assigned column per row. Deterministic for a given matrix.
std::vector<int> solve_assignment_min(const std::vector<std::vector<double>>& cost);

}  // namespace tcdet
