#pragma once

#include <vector>

#include "sdmm/matrix.hpp"

namespace sdmm {

/// Inner-product partition: A as p column blocks (t x s/p), B as p row
/// blocks (s/p x r), so AB = sum_j A_j B_j.
struct InnerPartition {
  std::vector<ComplexMatrix> blocks_a;
  std::vector<ComplexMatrix> blocks_b;

  std::size_t p() const { return blocks_a.size(); }
};

/// Outer-product partition: A as m row blocks (t/m x s), B as n column
/// blocks (s x r/n), so AB is the m x n grid of pairwise products.
struct OuterPartition {
  std::vector<ComplexMatrix> blocks_a;
  std::vector<ComplexMatrix> blocks_b;

  std::size_t m() const { return blocks_a.size(); }
  std::size_t n() const { return blocks_b.size(); }
};

/// Splits into p column blocks of A and p row blocks of B. p must divide
/// the shared inner dimension; non-divisible dimensions are rejected rather
/// than padded (padded zeros would be known plaintext).
InnerPartition split_inner(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t p);

/// Splits into m row blocks of A and n column blocks of B; m must divide
/// a.rows and n must divide b.cols.
OuterPartition split_outer(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t m,
                           std::size_t n);

/// Block-concatenates a rectangular grid; block heights must agree within a
/// grid row and widths within a grid column.
ComplexMatrix assemble_outer(const std::vector<std::vector<ComplexMatrix>>& grid);

/// Horizontal / vertical concatenation (1 x n and n x 1 grids).
ComplexMatrix concat_cols(const std::vector<ComplexMatrix>& blocks);
ComplexMatrix concat_rows(const std::vector<ComplexMatrix>& blocks);

}  // namespace sdmm
