#include "qgauss/wick.hpp"

#include <cmath>
#include <map>
#include <string>

namespace qgauss {

namespace {

void require_length(std::size_t n, const FockBasis& basis, const char* what) {
  if (static_cast<int>(n) > basis.max_degree()) {
    throw CapacityError(std::string(what) + ": word length " + std::to_string(n) +
                        " exceeds the truncation degree " + std::to_string(basis.max_degree()));
  }
}

Vector unit(int dim, int letter) {
  Vector e = Vector::Zero(dim);
  e[letter] = 1.0;
  return e;
}

// Applies sum_l a(e_l) to sum_l e_l (x) eta_l, where `eta` holds the degree-n
// block of a vector; returns the degree-(n-2) block.
Vector contract_first_letter(const Vector& eta, int n, int d, QParam q) {
  const std::size_t tail = eta.size() / d;  // d^{n-1}
  Vector out = Vector::Zero(tail / d);
  for (int l = 0; l < d; ++l) {
    for (std::size_t u = 0; u < tail; ++u) {
      const double c = eta[l * tail + u];
      if (c == 0.0) continue;
      double qp = 1.0;
      std::size_t low_span = tail / d;  // d^{n-2}
      for (int p = 0; p < n - 1; ++p) {
        const std::size_t letter = (u / low_span) % d;
        if (static_cast<int>(letter) == l) {
          const std::size_t target = (u / (low_span * d)) * low_span + u % low_span;
          out[target] += qp * c;
        }
        qp *= q.value();
        low_span /= d;
      }
    }
  }
  return out;
}

class HomogeneousWick {
public:
  HomogeneousWick(const FockBasis& basis, QParam q) : basis_(basis), q_(q) {
    for (int l = 0; l < basis.dim(); ++l) omegas_.push_back(omega(unit(basis.dim(), l), basis, q));
  }

  // Psi of a homogeneous vector given by its degree-n block.
  FockOperator operator()(const Vector& eta, int n) const {
    if (n == 0) return eta[0] * FockOperator::identity(basis_, q_);
    const int d = basis_.dim();
    FockOperator acc = FockOperator::zero(basis_, q_);
    if (n == 1) {
      for (int l = 0; l < d; ++l)
        if (eta[l] != 0.0) acc = acc + eta[l] * omegas_[l];
      return acc;
    }
    const std::size_t tail = eta.size() / d;
    for (int l = 0; l < d; ++l) {
      const Vector eta_l = eta.segment(l * tail, tail);
      if (eta_l.isZero(0.0)) continue;
      acc = acc + omegas_[l] * (*this)(eta_l, n - 1);
    }
    const Vector correction = contract_first_letter(eta, n, d, q_);
    if (!correction.isZero(0.0)) acc = acc - (*this)(correction, n - 2);
    return acc;
  }

private:
  FockBasis basis_;
  QParam q_;
  std::vector<FockOperator> omegas_;
};

}  // namespace

std::vector<Splitting> splittings(int n) {
  std::vector<Splitting> out;
  out.reserve(std::size_t{1} << n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Splitting s;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.creation.push_back(i);
      else s.annihilation.push_back(i);
    }
    for (int p : s.creation)
      for (int r : s.annihilation)
        if (p > r) ++s.exponent;
    out.push_back(std::move(s));
  }
  return out;
}

FockOperator wick_from_splittings(std::span<const Vector> word, const FockBasis& basis, QParam q) {
  require_length(word.size(), basis, "wick_from_splittings");
  const int n = static_cast<int>(word.size());
  std::vector<FockOperator> create, annihilate;
  for (const Vector& f : word) {
    create.push_back(creation(f, basis, q));
    annihilate.push_back(annihilation(f, basis, q));
  }
  FockOperator total = FockOperator::zero(basis, q);
  for (const Splitting& s : splittings(n)) {
    FockOperator term = FockOperator::identity(basis, q);
    for (int i : s.creation) term = term * create[i];
    for (int j : s.annihilation) term = term * annihilate[j];
    total = total + std::pow(q.value(), s.exponent) * term;
  }
  return total;
}

FockOperator wick_recursive(std::span<const Vector> word, const FockBasis& basis, QParam q) {
  require_length(word.size(), basis, "wick_recursive");
  const int n = static_cast<int>(word.size());
  const FockBasis ext = basis.extended(n);
  std::vector<FockOperator> omegas;
  for (const Vector& f : word) omegas.push_back(omega(f, ext, q));

  // Sub-words are identified by the bitmask of surviving positions; their
  // order is the original order.
  std::map<unsigned, FockOperator> memo;
  auto psi = [&](auto&& self, unsigned mask) -> FockOperator {
    if (auto it = memo.find(mask); it != memo.end()) return it->second;
    FockOperator result = FockOperator::identity(ext, q);
    if (mask != 0) {
      int first = 0;
      while (!(mask & (1u << first))) ++first;
      const unsigned rest = mask & ~(1u << first);
      result = omegas[first] * self(self, rest);
      double qp = 1.0;
      for (int i = first + 1; i < n; ++i) {
        if (!(rest & (1u << i))) continue;
        const double inner = word[first].dot(word[i]);
        if (inner != 0.0) result = result - (qp * inner) * self(self, rest & ~(1u << i));
        qp *= q.value();
      }
    }
    memo.emplace(mask, result);
    return result;
  };
  const unsigned full = n == 0 ? 0u : (n == 32 ? ~0u : (1u << n) - 1u);
  return psi(psi, full).compressed(basis.max_degree());
}

FockOperator wick_power(const Vector& f, int n, const FockBasis& basis, QParam q) {
  require_length(static_cast<std::size_t>(n), basis, "wick_power");
  const FockOperator a_star = creation(f, basis, q);
  const FockOperator a = annihilation(f, basis, q);
  std::vector<FockOperator> a_star_pow{FockOperator::identity(basis, q)};
  std::vector<FockOperator> a_pow{FockOperator::identity(basis, q)};
  for (int k = 1; k <= n; ++k) {
    a_star_pow.push_back(a_star_pow.back() * a_star);
    a_pow.push_back(a_pow.back() * a);
  }
  FockOperator total = FockOperator::zero(basis, q);
  for (int k = 0; k <= n; ++k)
    total = total + q_binomial(n, k, q) * (a_star_pow[k] * a_pow[n - k]);
  return total;
}

FockOperator wick(const FockVector& xi, QParam q) {
  const int degree = std::max(xi.degree(), 0);
  const FockBasis ext = xi.basis.extended(degree);
  const HomogeneousWick psi(ext, q);
  FockOperator total = FockOperator::zero(ext, q);
  for (int n = 0; n <= degree; ++n) {
    const Vector block = xi.coeffs.segment(xi.basis.offset(n), xi.basis.count(n));
    if (block.isZero(0.0)) continue;
    total = total + psi(block, n);
  }
  return total.compressed(xi.basis.max_degree());
}

FockOperator hermite_of_omega(const Vector& f, int n, const FockBasis& basis, QParam q) {
  const FockOperator w = omega(f, basis, q);
  FockOperator prev = FockOperator::identity(basis, q);
  if (n == 0) return prev;
  FockOperator cur = w;
  for (int k = 1; k < n; ++k) {
    FockOperator next = w * cur - q_int(k, q) * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

double hermite_identity_residual(const Vector& f, int n, const FockBasis& basis, QParam q) {
  if (std::abs(f.norm() - 1.0) > 1e-12) throw DomainError("hermite_identity_residual: f must be a unit vector");
  require_length(static_cast<std::size_t>(n), basis, "hermite_identity_residual");
  const std::vector<Vector> word(n, f);
  const FockOperator diff = wick_recursive(word, basis, q) - hermite_of_omega(f, n, basis, q);
  return q_norm(diff, basis.max_degree() - n);
}

FockOperator second_quantization(const Matrix& t, const FockVector& xi, const FockBasis& out, QParam q) {
  const FockOperator f_t = fock_map(t, xi.basis, out, q);
  return wick(f_t.apply(xi), q);
}

}  // namespace qgauss
