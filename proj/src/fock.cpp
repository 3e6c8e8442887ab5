#include "qgauss/fock.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace qgauss {

namespace {

using Triplet = Eigen::Triplet<double>;

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void require_dim(const Vector& f, const FockBasis& basis, const char* what) {
  if (f.size() != basis.dim()) {
    throw DomainError(std::string(what) + ": one-particle vector has length " +
                      std::to_string(f.size()) + ", basis dimension is " +
                      std::to_string(basis.dim()));
  }
}

// Local (within-degree) Gram blocks for degrees 0..max_degree.
std::vector<SparseMatrix> gram_blocks(const FockBasis& basis, QParam q, int max_degree) {
  const std::size_t d = basis.dim();
  std::vector<SparseMatrix> blocks;
  blocks.reserve(max_degree + 1);
  SparseMatrix g0(1, 1);
  g0.insert(0, 0) = 1.0;
  blocks.push_back(std::move(g0));
  for (int n = 1; n <= max_degree; ++n) {
    const SparseMatrix& prev = blocks.back();
    const std::size_t prev_count = ipow(d, n - 1);
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(prev.nonZeros()) * d * n);
    // <e_l (x) w', v>_q = sum_p q^p [v_p = l] <w', v without p>_q
    for (int col = 0; col < prev.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(prev, col); it; ++it) {
        const std::size_t w_rest = it.row();
        const std::size_t u = it.col();
        for (std::size_t l = 0; l < d; ++l) {
          const std::size_t row = l * prev_count + w_rest;
          double qp = 1.0;
          for (int p = 0; p < n; ++p) {
            const std::size_t low_span = ipow(d, n - 1 - p);
            const std::size_t high = u / low_span;
            const std::size_t low = u % low_span;
            const std::size_t v = (high * d + l) * low_span + low;
            triplets.emplace_back(row, v, qp * it.value());
            qp *= q.value();
          }
        }
      }
    }
    SparseMatrix block(prev_count * d, prev_count * d);
    block.setFromTriplets(triplets.begin(), triplets.end());
    block.prune(0.0);
    blocks.push_back(std::move(block));
  }
  return blocks;
}

SparseMatrix block_diagonal(const FockBasis& basis, const std::vector<SparseMatrix>& blocks) {
  std::vector<Triplet> triplets;
  for (int n = 0; n < static_cast<int>(blocks.size()); ++n) {
    const std::size_t off = basis.offset(n);
    for (int col = 0; col < blocks[n].outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(blocks[n], col); it; ++it)
        triplets.emplace_back(off + it.row(), off + it.col(), it.value());
  }
  SparseMatrix m(basis.size(), basis.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

std::string word_label(const FockBasis& basis, std::size_t index) {
  if (index == 0) return "vac";
  std::string label;
  for (int letter : basis.word(index)) {
    if (!label.empty()) label += '.';
    label += std::to_string(letter + 1);
  }
  return label;
}

Matrix leading_block(const SparseMatrix& m, std::size_t rows, std::size_t cols) {
  return Matrix(m.topLeftCorner(rows, cols));
}

}  // namespace

// ---------------------------------------------------------------------------
// FockBasis

FockBasis::FockBasis(int dim, int max_degree) : dim_(dim), max_degree_(max_degree) {
  if (dim < 1) throw DomainError("FockBasis: dimension must be >= 1");
  if (max_degree < 0) throw DomainError("FockBasis: max degree must be >= 0");
  offsets_.reserve(max_degree + 2);
  offsets_.push_back(0);
  std::size_t block = 1;
  for (int n = 0; n <= max_degree; ++n) {
    if (block > kMaxSize || offsets_.back() + block > kMaxSize) {
      throw CapacityError("FockBasis(d=" + std::to_string(dim) + ", N=" +
                          std::to_string(max_degree) + ") exceeds " + std::to_string(kMaxSize) +
                          " basis words");
    }
    offsets_.push_back(offsets_.back() + block);
    block *= static_cast<std::size_t>(dim);
  }
}

int FockBasis::degree_of(std::size_t index) const {
  if (index >= size()) throw DomainError("FockBasis: index out of range");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

std::vector<int> FockBasis::word(std::size_t index) const {
  const int n = degree_of(index);
  std::size_t local = index - offsets_[n];
  std::vector<int> letters(n);
  for (int k = n - 1; k >= 0; --k) {
    letters[k] = static_cast<int>(local % dim_);
    local /= dim_;
  }
  return letters;
}

std::size_t FockBasis::index_of(std::span<const int> letters) const {
  const int n = static_cast<int>(letters.size());
  if (n > max_degree_) throw DomainError("FockBasis: word longer than the truncation degree");
  std::size_t local = 0;
  for (int letter : letters) {
    if (letter < 0 || letter >= dim_) throw DomainError("FockBasis: letter out of range");
    local = local * dim_ + letter;
  }
  return offsets_[n] + local;
}

// ---------------------------------------------------------------------------
// FockVector

FockVector FockVector::zero(const FockBasis& basis) { return {basis, Vector::Zero(basis.size())}; }

FockVector FockVector::vacuum(const FockBasis& basis) {
  FockVector v = zero(basis);
  v.coeffs[0] = 1.0;
  return v;
}

FockVector FockVector::word(const FockBasis& basis, std::span<const int> letters) {
  FockVector v = zero(basis);
  v.coeffs[basis.index_of(letters)] = 1.0;
  return v;
}

FockVector FockVector::tensor(const FockBasis& basis, std::span<const Vector> factors) {
  const int n = static_cast<int>(factors.size());
  if (n > basis.max_degree()) throw DomainError("FockVector::tensor: too many factors");
  Vector block = Vector::Ones(1);
  for (int k = n - 1; k >= 0; --k) {
    require_dim(factors[k], basis, "FockVector::tensor");
    Vector next(block.size() * basis.dim());
    for (int l = 0; l < basis.dim(); ++l) next.segment(l * block.size(), block.size()) = factors[k][l] * block;
    block = std::move(next);
  }
  FockVector v = zero(basis);
  v.coeffs.segment(basis.offset(n), block.size()) = block;
  return v;
}

int FockVector::degree() const {
  for (std::size_t i = coeffs.size(); i-- > 0;)
    if (coeffs[i] != 0.0) return basis.degree_of(i);
  return -1;
}

// ---------------------------------------------------------------------------
// FockOperator

FockOperator::FockOperator(FockBasis basis, QParam q, SparseMatrix matrix)
    : FockOperator(basis, basis, q, std::move(matrix)) {}

FockOperator::FockOperator(FockBasis range, FockBasis domain, QParam q, SparseMatrix matrix)
    : range_(range), domain_(domain), q_(q), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.rows()) != range_.size() ||
      static_cast<std::size_t>(matrix_.cols()) != domain_.size()) {
    throw DomainError("FockOperator: matrix shape does not match its bases");
  }
}

FockOperator FockOperator::identity(const FockBasis& basis, QParam q) {
  SparseMatrix m(basis.size(), basis.size());
  m.setIdentity();
  return {basis, q, std::move(m)};
}

FockOperator FockOperator::zero(const FockBasis& basis, QParam q) {
  return {basis, q, SparseMatrix(basis.size(), basis.size())};
}

FockVector FockOperator::apply(const FockVector& v) const {
  if (!(v.basis == domain_)) throw DomainError("FockOperator::apply: basis mismatch");
  return {range_, matrix_ * v.coeffs};
}

FockOperator FockOperator::operator*(const FockOperator& rhs) const {
  if (!(domain_ == rhs.range_)) throw DomainError("FockOperator: product of incompatible operators");
  SparseMatrix m = (matrix_ * rhs.matrix_).pruned();
  return {range_, rhs.domain_, q_, std::move(m)};
}

FockOperator FockOperator::operator+(const FockOperator& rhs) const {
  if (!(range_ == rhs.range_ && domain_ == rhs.domain_))
    throw DomainError("FockOperator: sum of incompatible operators");
  return {range_, domain_, q_, SparseMatrix(matrix_ + rhs.matrix_)};
}

FockOperator FockOperator::operator-(const FockOperator& rhs) const {
  if (!(range_ == rhs.range_ && domain_ == rhs.domain_))
    throw DomainError("FockOperator: difference of incompatible operators");
  return {range_, domain_, q_, SparseMatrix(matrix_ - rhs.matrix_)};
}

FockOperator FockOperator::operator*(double scalar) const {
  return {range_, domain_, q_, SparseMatrix(matrix_ * scalar)};
}

FockOperator FockOperator::compressed(int max_degree) const {
  FockBasis r(range_.dim(), std::min(max_degree, range_.max_degree()));
  FockBasis d(domain_.dim(), std::min(max_degree, domain_.max_degree()));
  SparseMatrix m = matrix_.topLeftCorner(r.size(), d.size());
  return {r, d, q_, std::move(m)};
}

void FockOperator::write_csv(std::ostream& out) const {
  out << "# qgauss fock-operator v1; q=" << q_.value() << "; d=" << range_.dim()
      << "; N=" << range_.max_degree()
      << "; words ordered by length then lexicographically, letters 1-based\n";
  out << "word";
  for (std::size_t j = 0; j < domain_.size(); ++j) out << ',' << word_label(domain_, j);
  out << '\n';
  const Matrix m = dense();
  for (std::size_t i = 0; i < range_.size(); ++i) {
    out << word_label(range_, i);
    for (std::size_t j = 0; j < domain_.size(); ++j) out << ',' << m(i, j);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Operators

FockOperator gram(const FockBasis& basis, QParam q) {
  return {basis, q, block_diagonal(basis, gram_blocks(basis, q, basis.max_degree()))};
}

Matrix gram_block(const FockBasis& basis, QParam q, int degree) {
  if (degree < 0 || degree > basis.max_degree()) throw DomainError("gram_block: degree out of range");
  return Matrix(gram_blocks(basis, q, degree).back());
}

FockOperator creation(const Vector& f, const FockBasis& basis, QParam q) {
  require_dim(f, basis, "creation");
  const std::size_t d = basis.dim();
  std::vector<Triplet> triplets;
  for (int n = 0; n < basis.max_degree(); ++n) {
    const std::size_t count = basis.count(n);
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t l = 0; l < d; ++l)
        if (f[l] != 0.0) triplets.emplace_back(basis.offset(n + 1) + l * count + i, basis.offset(n) + i, f[l]);
  }
  SparseMatrix m(basis.size(), basis.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return {basis, q, std::move(m)};
}

FockOperator annihilation(const Vector& f, const FockBasis& basis, QParam q) {
  require_dim(f, basis, "annihilation");
  const std::size_t d = basis.dim();
  std::vector<Triplet> triplets;
  for (int n = 1; n <= basis.max_degree(); ++n) {
    const std::size_t count = basis.count(n);
    for (std::size_t w = 0; w < count; ++w) {
      double qp = 1.0;
      for (int p = 0; p < n; ++p) {
        const std::size_t low_span = ipow(d, n - 1 - p);
        const std::size_t letter = (w / low_span) % d;
        if (f[letter] != 0.0) {
          const std::size_t high = w / (low_span * d);
          const std::size_t target = high * low_span + w % low_span;
          triplets.emplace_back(basis.offset(n - 1) + target, basis.offset(n) + w, qp * f[letter]);
        }
        qp *= q.value();
      }
    }
  }
  SparseMatrix m(basis.size(), basis.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return {basis, q, std::move(m)};
}

FockOperator omega(const Vector& f, const FockBasis& basis, QParam q) {
  return annihilation(f, basis, q) + creation(f, basis, q);
}

Vector apply_creation(const Vector& f, const Vector& v, const FockBasis& basis) {
  require_dim(f, basis, "apply_creation");
  Vector out = Vector::Zero(basis.size());
  for (int n = 0; n < basis.max_degree(); ++n) {
    const std::size_t count = basis.count(n);
    const auto src = v.segment(basis.offset(n), count);
    if (src.isZero(0.0)) continue;
    for (int l = 0; l < basis.dim(); ++l)
      if (f[l] != 0.0) out.segment(basis.offset(n + 1) + l * count, count) += f[l] * src;
  }
  return out;
}

Vector apply_annihilation(const Vector& f, const Vector& v, const FockBasis& basis, QParam q) {
  require_dim(f, basis, "apply_annihilation");
  const std::size_t d = basis.dim();
  Vector out = Vector::Zero(basis.size());
  for (int n = 1; n <= basis.max_degree(); ++n) {
    const std::size_t count = basis.count(n);
    const std::size_t src_off = basis.offset(n);
    const std::size_t dst_off = basis.offset(n - 1);
    for (std::size_t w = 0; w < count; ++w) {
      const double c = v[src_off + w];
      if (c == 0.0) continue;
      double qp = 1.0;
      for (int p = 0; p < n; ++p) {
        const std::size_t low_span = ipow(d, n - 1 - p);
        const std::size_t letter = (w / low_span) % d;
        const std::size_t target = (w / (low_span * d)) * low_span + w % low_span;
        out[dst_off + target] += qp * f[letter] * c;
        qp *= q.value();
      }
    }
  }
  return out;
}

Vector apply_omega(const Vector& f, const Vector& v, const FockBasis& basis, QParam q) {
  return apply_annihilation(f, v, basis, q) + apply_creation(f, v, basis);
}

FockOperator q_adjoint(const FockOperator& x) {
  const SparseMatrix g_range = gram(x.range(), x.q()).matrix();
  const SparseMatrix g_domain = gram(x.domain(), x.q()).matrix();
  Eigen::SimplicialLDLT<SparseMatrix> solver(g_domain);
  if (solver.info() != Eigen::Success) throw Error("q_adjoint: Gram factorization failed");
  const Matrix rhs = Matrix(SparseMatrix(x.matrix().transpose()) * g_range);
  const Matrix adj = solver.solve(rhs);
  return {x.domain(), x.range(), x.q(), adj.sparseView()};
}

namespace {

constexpr std::size_t kDenseCap = 6000;

double generalized_max_eigenvalue(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0) return 0.0;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(a, b, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("generalized eigenproblem failed");
  return solver.eigenvalues().maxCoeff();
}

std::size_t restricted_cols(const FockOperator& x, int max_domain_degree) {
  const int k = max_domain_degree < 0 ? x.domain().max_degree()
                                      : std::min(max_domain_degree, x.domain().max_degree());
  const std::size_t cols = x.domain().offset(k + 1);
  if (cols > kDenseCap || x.range().size() > kDenseCap)
    throw CapacityError("dense norm computation limited to " + std::to_string(kDenseCap) + " words");
  return cols;
}

}  // namespace

double q_norm(const FockOperator& x, int max_domain_degree) {
  const std::size_t cols = restricted_cols(x, max_domain_degree);
  const Matrix g_range(gram(x.range(), x.q()).matrix());
  const Matrix g_domain(gram(x.domain(), x.q()).matrix());
  const Matrix r = leading_block(x.matrix(), x.range().size(), cols);
  Matrix a = r.transpose() * g_range * r;
  a = 0.5 * (a + a.transpose()).eval();
  const Matrix b = g_domain.topLeftCorner(cols, cols);
  return std::sqrt(std::max(0.0, generalized_max_eigenvalue(a, b)));
}

double zero_norm(const FockOperator& x, int max_domain_degree) {
  const std::size_t cols = restricted_cols(x, max_domain_degree);
  const Matrix r = leading_block(x.matrix(), x.range().size(), cols);
  if (r.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(r);
  return svd.singularValues()(0);
}

Vector q_spectrum(const FockOperator& x) {
  if (!(x.range() == x.domain())) throw DomainError("q_spectrum: operator must be square");
  if (x.range().size() > kDenseCap) throw CapacityError("q_spectrum: basis too large");
  const Matrix g(gram(x.range(), x.q()).matrix());
  Matrix a = g * x.dense();
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(a, g, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("q_spectrum: eigenproblem failed");
  return solver.eigenvalues();
}

double q_relation_residual(const Vector& f, const Vector& g, const FockBasis& basis, QParam q,
                           bool restrict_degrees) {
  const FockOperator af = annihilation(f, basis, q);
  const FockOperator ag_star = creation(g, basis, q);
  const FockOperator residual =
      af * ag_star - q.value() * (ag_star * af) - f.dot(g) * FockOperator::identity(basis, q);
  return q_norm(residual, restrict_degrees ? basis.max_degree() - 1 : -1);
}

NormBoundReport operator_norm_bound_check(const Vector& f, const FockBasis& basis, QParam q) {
  NormBoundReport report;
  report.truncated_norm = q_norm(annihilation(f, basis, q));
  report.bound = q.value() >= 0.0 ? f.norm() / std::sqrt(1.0 - q.value()) : f.norm();
  report.within_bound = report.truncated_norm <= report.bound * (1.0 + 1e-12) + 1e-15;
  return report;
}

double vacuum_expectation(const FockOperator& x) { return x.matrix().coeff(0, 0); }

double moment(std::span<const Vector> fs, const FockBasis& basis, QParam q) {
  if (static_cast<int>(fs.size()) > basis.max_degree()) {
    throw CapacityError("moment: " + std::to_string(fs.size()) +
                        " factors exceed the truncation degree N = " +
                        std::to_string(basis.max_degree()));
  }
  Vector v = Vector::Zero(basis.size());
  v[0] = 1.0;
  for (std::size_t i = fs.size(); i-- > 0;) v = apply_omega(fs[i], v, basis, q);
  return v[0];
}

double spectral_norm(const Matrix& t) {
  if (t.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(t);
  return svd.singularValues()(0);
}

FockOperator fock_map(const Matrix& t, const FockBasis& in, const FockBasis& out, QParam q) {
  if (t.rows() != out.dim() || t.cols() != in.dim())
    throw DomainError("fock_map: T must have shape out.dim() x in.dim()");
  if (in.max_degree() != out.max_degree())
    throw DomainError("fock_map: bases must share the truncation degree");
  const double norm = spectral_norm(t);
  if (norm > 1.0 + 1e-12)
    throw DomainError("fock_map: T is not a contraction (||T|| = " + std::to_string(norm) + ")");

  std::vector<Triplet> triplets;
  triplets.emplace_back(0, 0, 1.0);
  Matrix block = Matrix::Ones(1, 1);
  for (int n = 1; n <= in.max_degree(); ++n) {
    // first letter most significant: T^{(x)n} = T (x) T^{(x)(n-1)}
    Matrix next(block.rows() * t.rows(), block.cols() * t.cols());
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j)
        next.block(i * block.rows(), j * block.cols(), block.rows(), block.cols()) = t(i, j) * block;
    block = std::move(next);
    for (Eigen::Index j = 0; j < block.cols(); ++j)
      for (Eigen::Index i = 0; i < block.rows(); ++i)
        if (block(i, j) != 0.0) triplets.emplace_back(out.offset(n) + i, in.offset(n) + j, block(i, j));
  }
  SparseMatrix m(out.size(), in.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return {out, in, q, std::move(m)};
}

}  // namespace qgauss
