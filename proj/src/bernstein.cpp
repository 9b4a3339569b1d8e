#include "svflow/bernstein.hpp"

#include <cmath>
#include <stdexcept>

namespace svflow {

MultiIndexSet::MultiIndexSet(int degree) : degree_(degree) {
  if (degree < 0) throw std::invalid_argument("MultiIndexSet: degree < 0");
  const int k = degree;
  lookup_.assign((k + 1) * (k + 1), -1);
  for (int a0 = 0; a0 <= k; ++a0) {
    for (int a1 = 0; a1 <= k - a0; ++a1) {
      const int a2 = k - a0 - a1;
      lookup_[a0 * (k + 1) + a1] = static_cast<int>(indices_.size());
      indices_.push_back({a0, a1, a2});
    }
  }
  interior_mask_.assign(indices_.size(), 0);
  for (int i = 0; i < size(); ++i) {
    const Index3& a = indices_[i];
    if (a[0] < k && a[1] < k && a[2] < k) {
      interior_mask_[i] = 1;
      interior_.push_back(i);
    }
  }
}

int MultiIndexSet::index_of(int a0, int a1, int a2) const {
  const int k = degree_;
  if (a0 < 0 || a1 < 0 || a2 < 0 || a0 + a1 + a2 != k) return -1;
  return lookup_[a0 * (k + 1) + a1];
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return std::round(r);
}

double multinomial(int k, const Index3& a) {
  return binomial(k, a[0]) * binomial(k - a[0], a[1]);
}

Eigen::VectorXd eval_bernstein(const MultiIndexSet& set,
                               const std::array<double, 3>& lam) {
  const int k = set.degree();
  const int n = set.size();
  Eigen::VectorXd out(n);
  // powers of each barycentric coordinate up to k
  std::array<std::vector<double>, 3> pw;
  for (int i = 0; i < 3; ++i) {
    pw[i].resize(k + 1);
    pw[i][0] = 1.0;
    for (int e = 1; e <= k; ++e) pw[i][e] = pw[i][e - 1] * lam[i];
  }
  for (int i = 0; i < n; ++i) {
    const Index3& a = set[i];
    out[i] = multinomial(k, a) * pw[0][a[0]] * pw[1][a[1]] * pw[2][a[2]];
  }
  return out;
}

Eigen::MatrixXd eval_bernstein_dlam(const MultiIndexSet& set,
                                    const std::array<double, 3>& lam) {
  const int k = set.degree();
  const int n = set.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, 3);
  if (k == 0) return out;
  // dB^k_alpha/dlambda_i = k * B^{k-1}_{alpha - e_i}
  MultiIndexSet lower(k - 1);
  Eigen::VectorXd bl = eval_bernstein(lower, lam);
  for (int i = 0; i < n; ++i) {
    const Index3& a = set[i];
    for (int c = 0; c < 3; ++c) {
      if (a[c] == 0) continue;
      Index3 b = a;
      b[c] -= 1;
      out(i, c) = k * bl[lower.index_of(b)];
    }
  }
  return out;
}

Eigen::MatrixXd eval_bernstein_grad(const MultiIndexSet& set,
                                    const std::array<double, 3>& lam,
                                    const Eigen::Matrix<double, 3, 2>& grad_lambda) {
  return eval_bernstein_dlam(set, lam) * grad_lambda;
}

Eigen::MatrixXd bernstein_mass(const MultiIndexSet& set, double area) {
  const int k = set.degree();
  const int n = set.size();
  const double denom = (2 * k + 1) * (k + 1);  // |I^{2k}| / ... see below
  Eigen::MatrixXd m(n, n);
  // B^k_a B^k_b = [C(k,a)C(k,b)/C(2k,a+b)] B^{2k}_{a+b} and each B^{2k} has
  // integral 2*area/((2k+1)(2k+2)); combining gives area * C(k,a)C(k,b) /
  // (C(2k,a+b) * (2k+1)(k+1)).
  for (int i = 0; i < n; ++i) {
    const Index3& a = set[i];
    const double ma = multinomial(k, a);
    for (int j = 0; j <= i; ++j) {
      const Index3& b = set[j];
      Index3 s{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
      const double v = area * ma * multinomial(k, b) / (multinomial(2 * k, s) * denom);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

double bernstein_integral(int degree, double area) {
  return 2.0 * area / double((degree + 1) * (degree + 2));
}

InteriorPressureBasis interior_pressure_basis(int p) {
  if (p < 4)
    throw std::invalid_argument(
        "interior_pressure_basis: requires p >= 4 (stability range of the element pair)");
  MultiIndexSet set(p - 1);
  InteriorPressureBasis basis;
  basis.p = p;
  // anchor: lexicographically smallest interior multi-index
  int anchor = -1;
  Index3 best{};
  for (int i : set.interior()) {
    const Index3& a = set[i];
    if (anchor < 0 || a < best) {
      anchor = i;
      best = a;
    }
  }
  basis.anchor = anchor;
  for (int i : set.interior())
    if (i != anchor) basis.members.push_back(i);
  return basis;
}

Eigen::MatrixXd divergence_matrix(const MultiIndexSet& vel_set,
                                  const MultiIndexSet& press_set,
                                  const Eigen::Matrix<double, 3, 2>& grad_lambda) {
  const int p = vel_set.degree();
  if (press_set.degree() != p - 1)
    throw std::invalid_argument("divergence_matrix: pressure set must have degree p-1");
  const int n = vel_set.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(press_set.size(), 2 * n);
  // div(B^p_alpha e_c) = p * sum_i B^{p-1}_{alpha-e_i} (grad lambda_i)_c
  for (int j = 0; j < n; ++j) {
    const Index3& a = vel_set[j];
    for (int i = 0; i < 3; ++i) {
      if (a[i] == 0) continue;
      Index3 b = a;
      b[i] -= 1;
      const int r = press_set.index_of(b);
      d(r, 2 * j) += p * grad_lambda(i, 0);
      d(r, 2 * j + 1) += p * grad_lambda(i, 1);
    }
  }
  return d;
}

}  // namespace svflow
