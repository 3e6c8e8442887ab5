#include "qgauss/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qgauss {

QParam::QParam(double q) : q_(q) {
  if (!(q > -1.0 && q < 1.0)) {
    throw DomainError("q must lie in (-1, 1), got " + std::to_string(q));
  }
}

double q_int(unsigned n, QParam q) {
  double sum = 0.0;
  double power = 1.0;
  for (unsigned i = 0; i < n; ++i) {
    sum += power;
    power *= q.value();
  }
  return sum;
}

double q_factorial(unsigned n, QParam q) {
  double product = 1.0;
  for (unsigned i = 1; i <= n; ++i) product *= q_int(i, q);
  return product;
}

double q_binomial(unsigned n, unsigned k, QParam q) {
  if (k > n) {
    throw DomainError("q_binomial: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  }
  k = std::min(k, n - k);
  double value = 1.0;
  for (unsigned i = 1; i <= k; ++i) value *= q_int(n - k + i, q) / q_int(i, q);
  return value;
}

double pochhammer(double a, QParam q, unsigned n) {
  double product = 1.0;
  double aqj = a;
  for (unsigned j = 0; j < n; ++j) {
    product *= 1.0 - aqj;
    aqj *= q.value();
  }
  return product;
}

PochhammerResult pochhammer_infinite(double a, QParam q, double tol) {
  PochhammerResult result;
  double aqj = a;
  while (std::abs(aqj) >= tol) {
    result.value *= 1.0 - aqj;
    aqj *= q.value();
    ++result.factors;
  }
  result.error_bound = std::abs(aqj) / (1.0 - std::abs(q.value()));
  return result;
}

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  std::vector<bool> seen(images_.size(), false);
  for (int v : images_) {
    if (v < 1 || static_cast<std::size_t>(v) > images_.size() || seen[v - 1]) {
      throw DomainError("Permutation: images must be a bijection on {1..n}");
    }
    seen[v - 1] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<int> images(n);
  std::iota(images.begin(), images.end(), 1);
  return Permutation(std::move(images));
}

std::size_t inversions(const Permutation& p) {
  const auto images = p.images();
  std::size_t count = 0;
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j)
      if (images[i] > images[j]) ++count;
  return count;
}

void for_each_permutation(unsigned n, const std::function<void(const Permutation&)>& visit,
                          unsigned cap) {
  if (n > cap) {
    throw CapacityError("permutation enumeration of S_" + std::to_string(n) +
                        " exceeds the cap n <= " + std::to_string(cap));
  }
  std::vector<int> images(n);
  std::iota(images.begin(), images.end(), 1);
  do {
    visit(Permutation(images));
  } while (std::next_permutation(images.begin(), images.end()));
}

Polynomial Polynomial::monomial(unsigned k) {
  Polynomial p;
  p.coeffs.assign(k + 1, 0.0);
  p.coeffs[k] = 1.0;
  return p;
}

double Polynomial::operator()(double x) const noexcept {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double Polynomial::derivative(double x) const noexcept {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * coeffs[k];
  return acc;
}

double Polynomial::second_derivative(double x) const noexcept {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 2;)
    acc = acc * x + static_cast<double>(k * (k - 1)) * coeffs[k];
  return acc;
}

}  // namespace qgauss
