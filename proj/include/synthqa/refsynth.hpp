#pragma once

#include <cstddef>
#include <cstdint>

#include "synthqa/dataset.hpp"

namespace synthqa {

// Each column drawn i.i.d. from its real marginal. Numerical columns bootstrap
// the observed (non-missing) values.
TableData independent_sample(const TableData& real, std::size_t n, std::uint64_t seed);

// Rows drawn uniformly with replacement.
TableData bootstrap_sample(const TableData& real, std::size_t n, std::uint64_t seed);

// Every row repeats the per-column most frequent value; ties go to the
// lexicographically smallest level (smallest value for numerical columns).
TableData mode_collapse_sample(const TableData& real, std::size_t n);

}  // namespace synthqa
