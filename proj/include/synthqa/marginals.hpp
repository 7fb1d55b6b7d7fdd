#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "synthqa/dataset.hpp"

namespace synthqa {

inline constexpr std::size_t kMaxDegree = 3;

// Strictly increasing column indices; the canonical form of an unordered tuple.
class VariableTuple {
 public:
  VariableTuple() = default;
  explicit VariableTuple(std::vector<std::size_t> columns);

  std::size_t degree() const { return columns_.size(); }
  const std::vector<std::size_t>& columns() const { return columns_; }
  std::size_t operator[](std::size_t i) const { return columns_[i]; }

  std::string label(const Schema& schema) const;

  auto operator<=>(const VariableTuple&) const = default;

 private:
  std::vector<std::size_t> columns_;
};

struct MarginalCell {
  std::array<std::uint32_t, kMaxDegree> codes{};
  std::uint64_t count_real = 0;
  std::uint64_t count_synth = 0;
};

// Joint counts of one variable tuple on both sides. Cells are the union support,
// sorted by level codes.
struct MarginalTable {
  VariableTuple tuple;
  std::vector<MarginalCell> cells;
  std::uint64_t n_real = 0;
  std::uint64_t n_synth = 0;

  double p_real(const MarginalCell& cell) const {
    return n_real ? static_cast<double>(cell.count_real) / static_cast<double>(n_real) : 0.0;
  }
  double p_synth(const MarginalCell& cell) const {
    return n_synth ? static_cast<double>(cell.count_synth) / static_cast<double>(n_synth) : 0.0;
  }
};

// Tuple columns must be categorical in `pair` (numerical data must be binned first).
MarginalTable count_marginal(const AlignedPair& pair, const VariableTuple& tuple);

// All C(n, k) tuples over columns of `kind`, lexicographic order.
std::vector<VariableTuple> enumerate_tuples(const Schema& schema, std::size_t k, ColumnKind kind);

}  // namespace synthqa
