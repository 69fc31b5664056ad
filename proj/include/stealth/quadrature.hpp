#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stealth {

// Probabilist Gauss-Hermite rule: sum_i w_i f(x_i) ~ E[f(X)], X ~ Normal(0,1).
// Weights are normalized so they sum to exactly 1; nodes are symmetric and
// strictly increasing.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int node_count() const { return static_cast<int>(nodes.size()); }
};

namespace detail {

// Implicit-QL diagonalization of a symmetric tridiagonal matrix, tracking the
// first row of the eigenvector matrix (all Golub-Welsch needs for weights).
// d: diagonal, e: subdiagonal (e[n-1] unused), z: first-row seed.
inline void imtqlx(int n, std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  constexpr double prec = 2.220446049250313e-16;
  if (n == 1) return;
  e[n - 1] = 0.0;

  for (int l = 1; l <= n; ++l) {
    int j = 0;
    while (true) {
      int m;
      for (m = l; m <= n; ++m) {
        if (m == n) break;
        if (std::abs(e[m - 1]) <= prec * (std::abs(d[m - 1]) + std::abs(d[m]))) break;
      }
      double p = d[l - 1];
      if (m == l) break;
      if (j >= 50) throw std::runtime_error("imtqlx: QL iteration failed to converge");
      ++j;
      double g = (d[l] - p) / (2.0 * e[l - 1]);
      double r = std::sqrt(g * g + 1.0);
      g = d[m - 1] - p + e[l - 1] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
      double s = 1.0, c = 1.0;
      p = 0.0;
      const int mml = m - l;
      for (int ii = 1; ii <= mml; ++ii) {
        const int i = m - ii;
        double f = s * e[i - 1];
        const double b = c * e[i - 1];
        if (std::abs(g) <= std::abs(f)) {
          c = g / f;
          r = std::sqrt(c * c + 1.0);
          e[i] = f * r;
          s = 1.0 / r;
          c *= s;
        } else {
          s = f / g;
          r = std::sqrt(s * s + 1.0);
          e[i] = g * r;
          c = 1.0 / r;
          s *= c;
        }
        g = d[i] - p;
        r = (d[i - 1] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i] = g + p;
        g = c * r - b;
        f = z[i];
        z[i] = s * z[i - 1] + c * f;
        z[i - 1] = c * z[i - 1] - s * f;
      }
      d[l - 1] -= p;
      e[l - 1] = g;
      e[m - 1] = 0.0;
    }
  }

  // insertion sort ascending, carrying the first-row components along
  for (int ii = 1; ii < n; ++ii) {
    const int i = ii - 1;
    int k = i;
    double p = d[i];
    for (int jj = ii; jj < n; ++jj) {
      if (d[jj] < p) {
        k = jj;
        p = d[jj];
      }
    }
    if (k != i) {
      d[k] = d[i];
      d[i] = p;
      std::swap(z[i], z[k]);
    }
  }
}

}  // namespace detail

// Golub-Welsch on the probabilist Hermite Jacobi matrix (zero diagonal,
// off-diagonal sqrt(k)); eigenvalues are the nodes, squared first eigenvector
// components the weights.
inline QuadratureRule gauss_hermite_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_rule: need at least one node");

  std::vector<double> d(n, 0.0), e(n, 0.0), z(n, 0.0);
  for (int i = 1; i < n; ++i) e[i - 1] = std::sqrt(static_cast<double>(i));
  z[0] = 1.0;
  detail::imtqlx(n, d, e, z);

  QuadratureRule rule;
  rule.nodes = std::move(d);
  rule.weights.resize(n);
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    rule.weights[i] = z[i] * z[i];
    wsum += rule.weights[i];
  }
  for (auto& w : rule.weights) w /= wsum;

  // exact +- symmetry: pair up mirrored nodes and average out rounding
  for (int i = 0, j = n - 1; i < j; ++i, --j) {
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// Cached 201-node default used throughout; integrands here are smooth logistic
// transforms, so the fixed spectral rule is both fast and deterministic.
inline const QuadratureRule& default_rule() {
  static const QuadratureRule rule = gauss_hermite_rule(201);
  return rule;
}

// E[f(W)] with W ~ Normal(0, sigma^2).
template <typename F>
double gaussian_expectation(F&& f, double sigma, const QuadratureRule& rule = default_rule()) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_expectation: sigma must be positive");
  double acc = 0.0;
  const int n = rule.node_count();
  for (int i = 0; i < n; ++i) acc += rule.weights[i] * f(sigma * rule.nodes[i]);
  return acc;
}

}  // namespace stealth
