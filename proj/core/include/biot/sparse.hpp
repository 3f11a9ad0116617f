#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace biot {

using Vector = Eigen::VectorXd;

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed row storage. Column indices are sorted and unique within each
/// row; explicit zeros are allowed.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<int> row_ptr,
               std::vector<int> col_idx, std::vector<double> values);

  /// Duplicates are summed in input order. Throws std::out_of_range for
  /// indices outside `rows` x `cols`.
  static SparseMatrix from_triplets(std::span<const int> rows, std::span<const int> cols,
                                    std::span<const double> vals, std::size_t n_rows,
                                    std::size_t n_cols);
  static SparseMatrix from_triplets(std::span<const Triplet> triplets, std::size_t n_rows,
                                    std::size_t n_cols);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix zero(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Entry (i, j), zero when not stored.
  double coeff(std::size_t i, std::size_t j) const;
  /// Position of (i, j) in values(), or -1.
  std::ptrdiff_t find(std::size_t i, std::size_t j) const;

  Vector operator*(const Vector& x) const;
  /// y += alpha * A x
  void multiply_add(const Vector& x, Vector& y, double alpha = 1.0) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double alpha) const;

  double max_abs() const;
  double frobenius_norm() const;
  /// max |A - A^T| over all entries.
  double asymmetry() const;

  Eigen::SparseMatrix<double, Eigen::ColMajor, int> to_eigen() const;
  Eigen::MatrixXd to_dense() const;

  /// Matrix Market coordinate format, 17 significant digits.
  void write_matrix_market(std::ostream& os) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// alpha * A + beta * B on the union pattern.
SparseMatrix add(const SparseMatrix& a, double alpha, const SparseMatrix& b, double beta);

/// Grid of optional blocks with declared partition sizes. Missing blocks are zero.
class BlockSystem {
 public:
  BlockSystem(std::vector<std::size_t> row_sizes, std::vector<std::size_t> col_sizes);

  /// Throws std::invalid_argument when the block does not fit its partition.
  void set(std::size_t bi, std::size_t bj, SparseMatrix block);
  const std::optional<SparseMatrix>& block(std::size_t bi, std::size_t bj) const;

  std::size_t rows() const;
  std::size_t cols() const;
  SparseMatrix monolithic() const;

 private:
  std::vector<std::size_t> row_sizes_;
  std::vector<std::size_t> col_sizes_;
  std::vector<std::optional<SparseMatrix>> blocks_;
};

/// Convenience wrapper: nullptr entries are zero blocks.
SparseMatrix block_compose(const std::vector<std::vector<const SparseMatrix*>>& blocks,
                           const std::vector<std::size_t>& row_sizes,
                           const std::vector<std::size_t>& col_sizes);

enum class FactorKind {
  Spd,
  /// Symmetric quasi-definite (SPD (1,1) block, SND (2,2) block after sign
  /// flips); factored as LDL^T without pivoting.
  SymmetricIndefinite,
  General,
};

class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, std::ptrdiff_t pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  /// Row/column of the failing pivot in the original ordering, -1 if unknown.
  std::ptrdiff_t pivot() const { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

/// Reusable direct factorization. Immutable once built; solve() is safe to
/// call concurrently from several threads.
class Factorization {
 public:
  static constexpr double kPivotTolerance = 1e-14;

  /// Empty; solve() throws until assigned from factorize().
  Factorization() = default;

  /// Throws SingularMatrixError on a zero or tiny pivot
  /// (|d| < kPivotTolerance * max|a_ij|, measured on the diagonally
  /// equilibrated matrix for the LDL^T kinds), std::invalid_argument if not square.
  /// The LDL^T kinds read only the lower triangle and do not pivot.
  static Factorization factorize(const SparseMatrix& a, FactorKind kind);

  FactorKind kind() const;
  std::size_t size() const;

  Vector solve(const Vector& b) const;
  void solve(const Vector& b, Vector& x) const;

 private:
  struct Impl;
  explicit Factorization(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct CgResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Unpreconditioned conjugate gradients for SPD systems.
CgResult conjugate_gradient(const SparseMatrix& a, const Vector& b, double tol = 1e-12,
                            int max_iters = 10000);

}  // namespace biot
