#pragma once

// Wigner d-matrices d^l_{mn}(cos beta) for all degrees up to a bandlimit.
// Seeds at l = max(|m|,|n|) come from the closed-form boundary expressions
// (log-factorials for stability); higher degrees follow from the three-term
// recursion in l.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "so3prop/core.hpp"

namespace so3prop {

/// d^l(cos beta) for l = 0..L at a single beta.  Entries are indexed by
/// m,n in [-l,l] through operator()(l,m,n).
class WignerTable {
 public:
  WignerTable(int L, double beta) : L_(L), beta_(beta) {
    mats_.reserve(L + 1);
    for (int l = 0; l <= L; ++l) {
      mats_.emplace_back(Eigen::MatrixXd::Zero(2 * l + 1, 2 * l + 1));
    }
    fill();
  }

  int bandlimit() const { return L_; }
  double beta() const { return beta_; }

  double operator()(int l, int m, int n) const {
    return mats_[l](m + l, n + l);
  }

  const Eigen::MatrixXd& matrix(int l) const { return mats_[l]; }

 private:
  // d^l_{l,n}
  double seed_row(int l, int n, double ch, double sh) const {
    const double lc = 0.5 * (std::lgamma(2.0 * l + 1.0) -
                             std::lgamma(l + n + 1.0) -
                             std::lgamma(l - n + 1.0));
    return std::exp(lc) * std::pow(ch, l + n) * std::pow(-sh, l - n);
  }
  // d^l_{m,l}
  double seed_col(int l, int m, double ch, double sh) const {
    const double lc = 0.5 * (std::lgamma(2.0 * l + 1.0) -
                             std::lgamma(l + m + 1.0) -
                             std::lgamma(l - m + 1.0));
    return std::exp(lc) * std::pow(ch, l + m) * std::pow(sh, l - m);
  }

  void fill() {
    const double x = std::cos(beta_);
    const double ch = std::cos(0.5 * beta_);
    const double sh = std::sin(0.5 * beta_);
    for (int l = 0; l <= L_; ++l) {
      for (int m = -l; m <= l; ++m) {
        for (int n = -l; n <= l; ++n) {
          const int l0 = std::max(std::abs(m), std::abs(n));
          if (l < l0) continue;
          double v;
          if (l == 0) {
            v = 1.0;
          } else if (l == l0) {
            if (m == l0) {
              v = seed_row(l0, n, ch, sh);
            } else if (m == -l0) {
              v = seed_col(l0, -n, ch, sh);  // d_{-l,n} = d_{-n,l}
            } else if (n == l0) {
              v = seed_col(l0, m, ch, sh);
            } else {
              v = seed_row(l0, -m, ch, sh);  // d_{m,-l} = d_{l,-m}
            }
          } else if (l == 1) {  // l0 = 0: the recursion coefficient vanishes
            v = x;
          } else {
            const double d1 = mats_[l - 1](m + l - 1, n + l - 1);
            const double d2 =
                (l - 2 >= l0) ? mats_[l - 2](m + l - 2, n + l - 2) : 0.0;
            const double lm = l - 1.0;
            const double A = (2.0 * lm + 1.0) * (lm * (lm + 1.0) * x - m * n);
            const double B = (lm + 1.0) *
                             std::sqrt(std::max(lm * lm - m * m, 0.0)) *
                             std::sqrt(std::max(lm * lm - n * n, 0.0));
            const double C = lm * std::sqrt((lm + 1.0) * (lm + 1.0) - m * m) *
                             std::sqrt((lm + 1.0) * (lm + 1.0) - n * n);
            v = (A * d1 - B * d2) / C;
          }
          mats_[l](m + l, n + l) = v;
        }
      }
    }
  }

  int L_;
  double beta_;
  std::vector<Eigen::MatrixXd> mats_;
};

inline WignerTable wigner_d(int L, double beta) { return WignerTable(L, beta); }

}  // namespace so3prop
