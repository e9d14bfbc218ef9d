#include "ttbys/retrieval_kernels.hpp"

#include <cmath>

#include "ttbys/embedding.hpp"
#include "ttbys/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ttbys::kernels {

namespace {

void check_shapes(MatrixView m, std::span<const double> q, std::span<const std::size_t> rows,
                  std::span<double> out) {
  if (q.size() != m.dim) {
    fail(ErrorCode::DimensionMismatch, "query has dimension " + std::to_string(q.size()) +
                                           ", store has " + std::to_string(m.dim));
  }
  if (rows.size() != out.size()) fail(ErrorCode::InvalidArgument, "rows/out size mismatch");
  const std::size_t n = m.rows();
  for (std::size_t r : rows) {
    if (r >= n) fail(ErrorCode::InvalidArgument, "row index out of range");
  }
}

}  // namespace

void cosine_scores_serial(MatrixView matrix, std::span<const double> query,
                          std::span<const std::size_t> rows, std::span<double> out) {
  check_shapes(matrix, query, rows, out);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out[k] = cosine(query, matrix.row(rows[k]));
  }
}

void cosine_scores_parallel(MatrixView matrix, std::span<const double> query,
                            std::span<const std::size_t> rows, std::span<double> out) {
  check_shapes(matrix, query, rows, out);
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static) if (rows.size() >= kParallelThreshold)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    out[k] = cosine(query, matrix.row(rows[k]));
  }
}

void joint_scores_serial(MatrixView a, std::span<const double> qa, MatrixView b,
                         std::span<const double> qb, double weight_a,
                         std::span<const std::size_t> rows, std::span<double> out) {
  check_shapes(a, qa, rows, out);
  check_shapes(b, qb, rows, out);
  const double weight_b = 1.0 - weight_a;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out[k] = weight_a * cosine(qa, a.row(rows[k])) + weight_b * cosine(qb, b.row(rows[k]));
  }
}

void joint_scores_parallel(MatrixView a, std::span<const double> qa, MatrixView b,
                           std::span<const double> qb, double weight_a,
                           std::span<const std::size_t> rows, std::span<double> out) {
  check_shapes(a, qa, rows, out);
  check_shapes(b, qb, rows, out);
  const double weight_b = 1.0 - weight_a;
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static) if (rows.size() >= kParallelThreshold)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    out[k] = weight_a * cosine(qa, a.row(rows[k])) + weight_b * cosine(qb, b.row(rows[k]));
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ttbys::kernels
