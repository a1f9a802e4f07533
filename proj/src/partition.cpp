#include "sdmm/partition.hpp"

namespace sdmm {

namespace {

ComplexMatrix column_slice(const ComplexMatrix& m, std::size_t col_begin, std::size_t width) {
  ComplexMatrix out(m.rows(), width);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out(i, j) = m(i, col_begin + j);
    }
  }
  return out;
}

ComplexMatrix row_slice(const ComplexMatrix& m, std::size_t row_begin, std::size_t height) {
  ComplexMatrix out(height, m.cols());
  for (std::size_t i = 0; i < height; ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out(i, j) = m(row_begin + i, j);
    }
  }
  return out;
}

}  // namespace

InnerPartition split_inner(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t p) {
  if (p == 0) {
    throw InvalidArgument("inner partition count p must be >= 1");
  }
  if (a.cols() != b.rows()) {
    throw DimensionError("inner partition operands are not multiplicable", a.rows(), a.cols(),
                         b.rows(), b.cols());
  }
  if (a.cols() % p != 0) {
    throw InvalidArgument("inner dimension s = " + std::to_string(a.cols()) +
                          " is not divisible by p = " + std::to_string(p));
  }
  const std::size_t width = a.cols() / p;
  InnerPartition part;
  part.blocks_a.reserve(p);
  part.blocks_b.reserve(p);
  for (std::size_t j = 0; j < p; ++j) {
    part.blocks_a.push_back(column_slice(a, j * width, width));
    part.blocks_b.push_back(row_slice(b, j * width, width));
  }
  return part;
}

OuterPartition split_outer(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t m,
                           std::size_t n) {
  if (m == 0 || n == 0) {
    throw InvalidArgument("outer partition counts must be >= 1");
  }
  if (a.cols() != b.rows()) {
    throw DimensionError("outer partition operands are not multiplicable", a.rows(), a.cols(),
                         b.rows(), b.cols());
  }
  if (a.rows() % m != 0) {
    throw InvalidArgument("t = " + std::to_string(a.rows()) +
                          " is not divisible by m = " + std::to_string(m));
  }
  if (b.cols() % n != 0) {
    throw InvalidArgument("r = " + std::to_string(b.cols()) +
                          " is not divisible by n = " + std::to_string(n));
  }
  const std::size_t height = a.rows() / m;
  const std::size_t width = b.cols() / n;
  OuterPartition part;
  part.blocks_a.reserve(m);
  part.blocks_b.reserve(n);
  for (std::size_t j = 0; j < m; ++j) {
    part.blocks_a.push_back(row_slice(a, j * height, height));
  }
  for (std::size_t j = 0; j < n; ++j) {
    part.blocks_b.push_back(column_slice(b, j * width, width));
  }
  return part;
}

ComplexMatrix assemble_outer(const std::vector<std::vector<ComplexMatrix>>& grid) {
  if (grid.empty() || grid.front().empty()) {
    throw InvalidArgument("assemble_outer needs a non-empty grid");
  }
  const std::size_t grid_cols = grid.front().size();
  std::size_t total_rows = 0;
  std::size_t total_cols = 0;
  for (std::size_t j = 0; j < grid_cols; ++j) {
    total_cols += grid.front()[j].cols();
  }
  for (const auto& row : grid) {
    if (row.size() != grid_cols) {
      throw InvalidArgument("assemble_outer grid is ragged");
    }
    const std::size_t height = row.front().rows();
    std::size_t row_cols = 0;
    for (std::size_t j = 0; j < grid_cols; ++j) {
      if (row[j].rows() != height) {
        throw InvalidArgument("assemble_outer block heights differ within a grid row");
      }
      if (row[j].cols() != grid.front()[j].cols()) {
        throw InvalidArgument("assemble_outer block widths differ within a grid column");
      }
      row_cols += row[j].cols();
    }
    if (row_cols != total_cols) {
      throw InvalidArgument("assemble_outer grid is ragged");
    }
    total_rows += height;
  }

  ComplexMatrix out(total_rows, total_cols);
  std::size_t row_offset = 0;
  for (const auto& row : grid) {
    std::size_t col_offset = 0;
    for (const ComplexMatrix& block : row) {
      for (std::size_t i = 0; i < block.rows(); ++i) {
        for (std::size_t j = 0; j < block.cols(); ++j) {
          out(row_offset + i, col_offset + j) = block(i, j);
        }
      }
      col_offset += block.cols();
    }
    row_offset += row.front().rows();
  }
  return out;
}

ComplexMatrix concat_cols(const std::vector<ComplexMatrix>& blocks) {
  return assemble_outer({blocks});
}

ComplexMatrix concat_rows(const std::vector<ComplexMatrix>& blocks) {
  std::vector<std::vector<ComplexMatrix>> grid;
  grid.reserve(blocks.size());
  for (const ComplexMatrix& b : blocks) {
    grid.push_back({b});
  }
  return assemble_outer(grid);
}

}  // namespace sdmm
