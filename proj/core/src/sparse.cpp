#include "biot/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <regex>
#include <variant>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <cholmod.h>

namespace biot {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<int> row_ptr,
                           std::vector<int> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || col_idx_.size() != values_.size() ||
      static_cast<std::size_t>(row_ptr_.back()) != values_.size()) {
    throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
  }
}

SparseMatrix SparseMatrix::from_triplets(std::span<const int> rows, std::span<const int> cols,
                                         std::span<const double> vals, std::size_t n_rows,
                                         std::size_t n_cols) {
  if (rows.size() != cols.size() || rows.size() != vals.size()) {
    throw std::invalid_argument("from_triplets: array lengths differ");
  }
  std::vector<Triplet> t(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) t[k] = {rows[k], cols[k], vals[k]};
  return from_triplets(t, n_rows, n_cols);
}

SparseMatrix SparseMatrix::from_triplets(std::span<const Triplet> triplets, std::size_t n_rows,
                                         std::size_t n_cols) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n_rows ||
        static_cast<std::size_t>(t.col) >= n_cols) {
      throw std::out_of_range("from_triplets: index (" + std::to_string(t.row) + ", " +
                              std::to_string(t.col) + ") outside matrix");
    }
  }
  // Counting sort by row keeps input order within a row; a stable sort by
  // column then preserves the summation order of duplicates.
  std::vector<int> row_ptr(n_rows + 1, 0);
  for (const auto& t : triplets) ++row_ptr[t.row + 1];
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<std::pair<int, double>> bucket(triplets.size());
  {
    std::vector<int> next(row_ptr.begin(), row_ptr.end() - 1);
    for (const auto& t : triplets) bucket[next[t.row]++] = {t.col, t.value};
  }

  std::vector<int> out_ptr(n_rows + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t i = 0; i < n_rows; ++i) {
    auto first = bucket.begin() + row_ptr[i];
    auto last = bucket.begin() + row_ptr[i + 1];
    std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = first; it != last; ++it) {
      if (!col_idx.empty() && static_cast<int>(col_idx.size()) > out_ptr[i] &&
          col_idx.back() == it->first) {
        values.back() += it->second;
      } else {
        col_idx.push_back(it->first);
        values.push_back(it->second);
      }
    }
    out_ptr[i + 1] = static_cast<int>(col_idx.size());
  }
  return SparseMatrix(n_rows, n_cols, std::move(out_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<int> ptr(n + 1), idx(n);
  std::iota(ptr.begin(), ptr.end(), 0);
  std::iota(idx.begin(), idx.end(), 0);
  return SparseMatrix(n, n, std::move(ptr), std::move(idx), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::zero(std::size_t rows, std::size_t cols) {
  return SparseMatrix(rows, cols, std::vector<int>(rows + 1, 0), {}, {});
}

std::ptrdiff_t SparseMatrix::find(std::size_t i, std::size_t j) const {
  const auto first = col_idx_.begin() + row_ptr_[i];
  const auto last = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(first, last, static_cast<int>(j));
  if (it == last || *it != static_cast<int>(j)) return -1;
  return it - col_idx_.begin();
}

double SparseMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto k = find(i, j);
  return k < 0 ? 0.0 : values_[k];
}

Vector SparseMatrix::operator*(const Vector& x) const {
  Vector y = Vector::Zero(static_cast<Eigen::Index>(rows_));
  multiply_add(x, y);
  return y;
}

void SparseMatrix::multiply_add(const Vector& x, Vector& y, double alpha) const {
  if (static_cast<std::size_t>(x.size()) != cols_ || static_cast<std::size_t>(y.size()) != rows_) {
    throw std::invalid_argument("SparseMatrix::multiply_add: dimension mismatch");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) sum += values_[k] * x[col_idx_[k]];
    y[i] += alpha * sum;
  }
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<int> ptr(cols_ + 1, 0);
  for (int c : col_idx_) ++ptr[c + 1];
  std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
  std::vector<int> idx(nnz());
  std::vector<double> val(nnz());
  std::vector<int> next(ptr.begin(), ptr.end() - 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const int dst = next[col_idx_[k]]++;
      idx[dst] = static_cast<int>(i);
      val[dst] = values_[k];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix SparseMatrix::scaled(double alpha) const {
  SparseMatrix out = *this;
  for (double& v : out.values_) v *= alpha;
  return out;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

double SparseMatrix::asymmetry() const {
  if (rows_ != cols_) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      m = std::max(m, std::abs(values_[k] - coeff(col_idx_[k], i)));
    }
  }
  return m;
}

Eigen::SparseMatrix<double, Eigen::ColMajor, int> SparseMatrix::to_eigen() const {
  // A CSR matrix is the CSC storage of its transpose.
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> view(
      static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_),
      static_cast<Eigen::Index>(nnz()), row_ptr_.data(), col_idx_.data(), values_.data());
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> out = view;
  out.makeCompressed();
  return out;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_),
                                            static_cast<Eigen::Index>(cols_));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, col_idx_[k]) += values_[k];
  }
  return d;
}

void SparseMatrix::write_matrix_market(std::ostream& os) const {
  const auto prec = os.precision();
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << rows_ << ' ' << cols_ << ' ' << nnz() << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      os << i + 1 << ' ' << col_idx_[k] + 1 << ' ' << values_[k] << '\n';
    }
  }
  os.precision(prec);
}

SparseMatrix add(const SparseMatrix& a, double alpha, const SparseMatrix& b, double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("add: dimension mismatch");
  }
  std::vector<int> ptr(a.rows() + 1, 0);
  std::vector<int> idx;
  std::vector<double> val;
  idx.reserve(std::max(a.nnz(), b.nnz()));
  val.reserve(idx.capacity());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    int ka = a.row_ptr()[i], kb = b.row_ptr()[i];
    const int ea = a.row_ptr()[i + 1], eb = b.row_ptr()[i + 1];
    while (ka < ea || kb < eb) {
      const int ca = ka < ea ? a.col_idx()[ka] : std::numeric_limits<int>::max();
      const int cb = kb < eb ? b.col_idx()[kb] : std::numeric_limits<int>::max();
      if (ca == cb) {
        idx.push_back(ca);
        val.push_back(alpha * a.values()[ka++] + beta * b.values()[kb++]);
      } else if (ca < cb) {
        idx.push_back(ca);
        val.push_back(alpha * a.values()[ka++]);
      } else {
        idx.push_back(cb);
        val.push_back(beta * b.values()[kb++]);
      }
    }
    ptr[i + 1] = static_cast<int>(idx.size());
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(ptr), std::move(idx), std::move(val));
}

BlockSystem::BlockSystem(std::vector<std::size_t> row_sizes, std::vector<std::size_t> col_sizes)
    : row_sizes_(std::move(row_sizes)),
      col_sizes_(std::move(col_sizes)),
      blocks_(row_sizes_.size() * col_sizes_.size()) {}

void BlockSystem::set(std::size_t bi, std::size_t bj, SparseMatrix block) {
  if (bi >= row_sizes_.size() || bj >= col_sizes_.size()) {
    throw std::invalid_argument("BlockSystem::set: block index out of range");
  }
  if (block.rows() != row_sizes_[bi] || block.cols() != col_sizes_[bj]) {
    throw std::invalid_argument("BlockSystem::set: block (" + std::to_string(bi) + ", " +
                                std::to_string(bj) + ") has dimensions " +
                                std::to_string(block.rows()) + "x" + std::to_string(block.cols()) +
                                ", partition expects " + std::to_string(row_sizes_[bi]) + "x" +
                                std::to_string(col_sizes_[bj]));
  }
  blocks_[bi * col_sizes_.size() + bj] = std::move(block);
}

const std::optional<SparseMatrix>& BlockSystem::block(std::size_t bi, std::size_t bj) const {
  return blocks_.at(bi * col_sizes_.size() + bj);
}

std::size_t BlockSystem::rows() const {
  return std::accumulate(row_sizes_.begin(), row_sizes_.end(), std::size_t{0});
}
std::size_t BlockSystem::cols() const {
  return std::accumulate(col_sizes_.begin(), col_sizes_.end(), std::size_t{0});
}

SparseMatrix BlockSystem::monolithic() const {
  std::vector<int> ptr(rows() + 1, 0);
  std::vector<int> idx;
  std::vector<double> val;
  std::size_t nnz = 0;
  for (const auto& b : blocks_) nnz += b ? b->nnz() : 0;
  idx.reserve(nnz);
  val.reserve(nnz);

  std::vector<std::size_t> col_offset(col_sizes_.size() + 1, 0);
  std::partial_sum(col_sizes_.begin(), col_sizes_.end(), col_offset.begin() + 1);

  std::size_t row = 0;
  for (std::size_t bi = 0; bi < row_sizes_.size(); ++bi) {
    for (std::size_t i = 0; i < row_sizes_[bi]; ++i, ++row) {
      for (std::size_t bj = 0; bj < col_sizes_.size(); ++bj) {
        const auto& b = blocks_[bi * col_sizes_.size() + bj];
        if (!b) continue;
        for (int k = b->row_ptr()[i]; k < b->row_ptr()[i + 1]; ++k) {
          idx.push_back(b->col_idx()[k] + static_cast<int>(col_offset[bj]));
          val.push_back(b->values()[k]);
        }
      }
      ptr[row + 1] = static_cast<int>(idx.size());
    }
  }
  return SparseMatrix(rows(), cols(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix block_compose(const std::vector<std::vector<const SparseMatrix*>>& blocks,
                           const std::vector<std::size_t>& row_sizes,
                           const std::vector<std::size_t>& col_sizes) {
  if (blocks.size() != row_sizes.size()) {
    throw std::invalid_argument("block_compose: block rows do not match partition");
  }
  BlockSystem system(row_sizes, col_sizes);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].size() != col_sizes.size()) {
      throw std::invalid_argument("block_compose: block columns do not match partition");
    }
    for (std::size_t j = 0; j < blocks[i].size(); ++j) {
      if (blocks[i][j]) system.set(i, j, *blocks[i][j]);
    }
  }
  return system.monolithic();
}

// ---------------------------------------------------------------------------

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Lu = Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>>;

// Simplicial LDL^T without pivoting. The factor is only read after
// construction; each solve runs on its own cholmod_common so concurrent
// solves share nothing mutable.
struct Ldlt {
  cholmod_common common{};
  cholmod_factor* factor = nullptr;

  Ldlt() { cholmod_start(&common); }
  ~Ldlt() {
    if (factor) cholmod_free_factor(&factor, &common);
    cholmod_finish(&common);
  }
  Ldlt(const Ldlt&) = delete;
  Ldlt& operator=(const Ldlt&) = delete;
};

}  // namespace

struct Factorization::Impl {
  FactorKind kind;
  std::size_t n = 0;
  std::unique_ptr<Ldlt> ldlt;
  std::unique_ptr<Lu> lu;
  Vector scale;  // symmetric diagonal equilibration for the LDL^T paths
};

Factorization Factorization::factorize(const SparseMatrix& a, FactorKind kind) {
  if (a.rows() != a.cols()) throw std::invalid_argument("factorize: matrix is not square");
  auto impl = std::make_shared<Impl>();
  impl->kind = kind;
  impl->n = a.rows();

  if (kind == FactorKind::General) {
    const EigenSparse m = a.to_eigen();
    impl->lu = std::make_unique<Lu>();
    impl->lu->analyzePattern(m);
    impl->lu->factorize(m);
    if (impl->lu->info() != Eigen::Success) {
      const std::string msg = impl->lu->lastErrorMessage();
      std::ptrdiff_t pivot = -1;
      std::smatch match;
      if (std::regex_search(msg, match, std::regex("([0-9]+)\\s*$"))) {
        pivot = std::stoll(match[1].str());
      }
      throw SingularMatrixError("factorize: LU failed: " + msg, pivot);
    }
    return Factorization(std::move(impl));
  }

  // Equilibrate so that |diag| = 1; the blocks of the Biot systems differ by
  // many orders of magnitude for physical parameters.
  const auto n = static_cast<Eigen::Index>(impl->n);
  impl->scale = Vector::Ones(n);
  for (std::size_t i = 0; i < impl->n; ++i) {
    const double d = std::abs(a.coeff(i, i));
    if (d > 0.0 && std::isfinite(d)) impl->scale[static_cast<Eigen::Index>(i)] = 1.0 / std::sqrt(d);
  }

  impl->ldlt = std::make_unique<Ldlt>();
  cholmod_common& cm = impl->ldlt->common;
  cm.print = 0;
  cm.error_handler = nullptr;
  cm.supernodal = CHOLMOD_SIMPLICIAL;
  cm.final_ll = 0;
  // Row j of the symmetric CSR matrix is column j of a CSC matrix; keep the
  // entries with row >= column, i.e. the lower triangle.
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& va = a.values();
  const int nn = static_cast<int>(impl->n);
  std::size_t nnz_lower = 0;
  for (int j = 0; j < nn; ++j) {
    for (int k = rp[j]; k < rp[j + 1]; ++k) nnz_lower += ci[k] >= j ? 1 : 0;
  }
  cholmod_sparse* m = cholmod_allocate_sparse(impl->n, impl->n, nnz_lower, 1, 1, -1, CHOLMOD_REAL, &cm);
  if (!m) throw std::bad_alloc();
  auto* mp = static_cast<int*>(m->p);
  auto* mi = static_cast<int*>(m->i);
  auto* mx = static_cast<double*>(m->x);
  int pos = 0;
  double scaled_max = 0.0;
  for (int j = 0; j < nn; ++j) {
    mp[j] = pos;
    for (int k = rp[j]; k < rp[j + 1]; ++k) {
      if (ci[k] < j) continue;
      mi[pos] = ci[k];
      mx[pos] = va[k] * impl->scale[j] * impl->scale[ci[k]];
      scaled_max = std::max(scaled_max, std::abs(mx[pos]));
      ++pos;
    }
  }
  mp[nn] = pos;

  impl->ldlt->factor = cholmod_analyze(m, &cm);
  const bool ok = impl->ldlt->factor && cholmod_factorize(m, impl->ldlt->factor, &cm);
  cholmod_free_sparse(&m, &cm);
  if (!impl->ldlt->factor || cm.status == CHOLMOD_OUT_OF_MEMORY) {
    throw std::bad_alloc();
  }
  (void)ok;

  const cholmod_factor* f = impl->ldlt->factor;
  const auto* lp = static_cast<const int*>(f->p);
  const auto* lx = static_cast<const double*>(f->x);
  const auto* perm = static_cast<const int*>(f->Perm);
  const double tiny = kPivotTolerance * scaled_max;
  for (std::size_t k = 0; k < impl->n; ++k) {
    // Simplicial LDL^T keeps D(k) as the first entry of column k.
    const double d = (f->minor < f->n && k >= f->minor) ? 0.0 : lx[lp[k]];
    const bool bad = !(std::abs(d) >= tiny) || (kind == FactorKind::Spd && d <= 0.0);
    if (bad) {
      const std::ptrdiff_t pivot = perm ? perm[k] : static_cast<std::ptrdiff_t>(k);
      throw SingularMatrixError("factorize: " +
                                    std::string(kind == FactorKind::Spd && d < 0.0
                                                    ? "matrix is not positive definite"
                                                    : "zero or tiny pivot") +
                                    " at row " + std::to_string(pivot),
                                pivot);
    }
  }
  return Factorization(std::move(impl));
}

FactorKind Factorization::kind() const {
  if (!impl_) throw std::logic_error("Factorization: empty");
  return impl_->kind;
}
std::size_t Factorization::size() const { return impl_ ? impl_->n : 0; }

Vector Factorization::solve(const Vector& b) const {
  Vector x;
  solve(b, x);
  return x;
}

void Factorization::solve(const Vector& b, Vector& x) const {
  if (!impl_) throw std::logic_error("Factorization::solve: empty");
  if (static_cast<std::size_t>(b.size()) != impl_->n) {
    throw std::invalid_argument("Factorization::solve: rhs has wrong length");
  }
  if (impl_->lu) {
    x = impl_->lu->solve(b);
    return;
  }
  Vector sb = impl_->scale.cwiseProduct(b);
  cholmod_common cm;
  cholmod_start(&cm);
  cm.print = 0;
  cholmod_dense rhs{};
  rhs.nrow = impl_->n;
  rhs.ncol = 1;
  rhs.nzmax = impl_->n;
  rhs.d = impl_->n;
  rhs.x = sb.data();
  rhs.xtype = CHOLMOD_REAL;
  rhs.dtype = CHOLMOD_DOUBLE;
  cholmod_dense* sol = cholmod_solve(CHOLMOD_A, impl_->ldlt->factor, &rhs, &cm);
  if (!sol) {
    cholmod_finish(&cm);
    throw std::runtime_error("Factorization::solve: CHOLMOD solve failed");
  }
  x = impl_->scale.cwiseProduct(
      Eigen::Map<const Vector>(static_cast<const double*>(sol->x), b.size()));
  cholmod_free_dense(&sol, &cm);
  cholmod_finish(&cm);
}

CgResult conjugate_gradient(const SparseMatrix& a, const Vector& b, double tol, int max_iters) {
  CgResult res;
  res.x = Vector::Zero(b.size());
  Vector r = b;
  Vector p = r;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  double rr = r.squaredNorm();
  for (int it = 1; it <= max_iters; ++it) {
    const Vector ap = a * p;
    const double alpha = rr / p.dot(ap);
    res.x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    res.iterations = it;
    res.relative_residual = std::sqrt(rr_new) / bnorm;
    if (res.relative_residual < tol) {
      res.converged = true;
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return res;
}

}  // namespace biot
