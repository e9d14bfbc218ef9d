#pragma once
// Scoring kernels behind knowledge-base retrieval. Each kernel has a serial
// reference and an OpenMP version; both compute every row with identical
// arithmetic, so their outputs are bitwise equal.

#include <cstddef>
#include <span>

namespace ttbys::kernels {

/// Row-major matrix view, rows x dim.
struct MatrixView {
  std::span<const double> data;
  std::size_t dim = 0;

  std::size_t rows() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> row(std::size_t i) const { return data.subspan(i * dim, dim); }
};

/// Rows below this count run serially even in the parallel kernels.
inline constexpr std::size_t kParallelThreshold = 256;

/// out[k] = cosine(query, matrix.row(rows[k])).
void cosine_scores_serial(MatrixView matrix, std::span<const double> query,
                          std::span<const std::size_t> rows, std::span<double> out);
void cosine_scores_parallel(MatrixView matrix, std::span<const double> query,
                            std::span<const std::size_t> rows, std::span<double> out);

/// out[k] = w * cosine(qa, a.row(rows[k])) + (1 - w) * cosine(qb, b.row(rows[k])).
void joint_scores_serial(MatrixView a, std::span<const double> qa, MatrixView b,
                         std::span<const double> qb, double weight_a,
                         std::span<const std::size_t> rows, std::span<double> out);
void joint_scores_parallel(MatrixView a, std::span<const double> qa, MatrixView b,
                           std::span<const double> qb, double weight_a,
                           std::span<const std::size_t> rows, std::span<double> out);

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();

}  // namespace ttbys::kernels
