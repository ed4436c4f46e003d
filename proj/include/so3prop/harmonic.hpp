#pragma once

// Harmonic analysis on SO(3): irreducible unitary representations built from
// Wigner-d functions and the forward/inverse Fourier transforms over a
// product quadrature grid in 3-1-3 Euler angles.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "so3prop/core.hpp"
#include "so3prop/errors.hpp"
#include "so3prop/parallel.hpp"
#include "so3prop/wigner.hpp"

namespace so3prop {

using Complex = std::complex<double>;

namespace detail {

/// i^k for integer k.
inline Complex ipow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return Complex(1.0, 0.0);
    case 1: return Complex(0.0, 1.0);
    case 2: return Complex(-1.0, 0.0);
    default: return Complex(0.0, -1.0);
  }
}

/// Composite Simpson weights for an odd node count over spacing h.
inline std::vector<double> simpson_weights(int n, double h) {
  std::vector<double> w(n, 1.0);
  for (int i = 1; i + 1 < n; ++i) w[i] = (i % 2 == 1) ? 4.0 : 2.0;
  for (double& v : w) v *= h / 3.0;
  return w;
}

/// Clenshaw-Curtis weights on u_j = cos(j pi / (n-1)), j = 0..n-1, for the
/// integral over u in [-1,1].  On the equiangular beta grid this integrates
/// sin(beta) dbeta exactly for polynomials in cos(beta) up to degree n-1.
inline std::vector<double> clenshaw_curtis_weights(int n) {
  const int N = n - 1;
  std::vector<double> w(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k <= N / 2; ++k) {
      const double bk = (k == 0 || 2 * k == N) ? 1.0 : 2.0;
      s += bk / (1.0 - 4.0 * double(k) * double(k)) *
           std::cos(2.0 * kPi * k * j / N);
    }
    w[j] = 2.0 / N * s;
  }
  w[0] *= 0.5;
  w[n - 1] *= 0.5;
  return w;
}

}  // namespace detail

enum class BetaScheme {
  kClenshawCurtis,  // exact for band-limited integrands on the same grid
  kSimpson,         // literal composite Simpson times sin(beta)
};

/// Product quadrature for normalized Haar measure on SO(3) in 3-1-3 Euler
/// angles: equispaced nodes, composite Simpson in alpha and gamma, selectable
/// beta weights.  Node counts must be odd.
class So3Quadrature {
 public:
  So3Quadrature(int n_alpha, int n_beta, int n_gamma,
                BetaScheme scheme = BetaScheme::kClenshawCurtis)
      : na_(n_alpha), nb_(n_beta), ng_(n_gamma), scheme_(scheme) {
    if (na_ < 3 || nb_ < 3 || ng_ < 3 || na_ % 2 == 0 || nb_ % 2 == 0 ||
        ng_ % 2 == 0) {
      throw ConfigError("So3Quadrature: node counts must be odd and >= 3");
    }
    alpha_.resize(na_);
    beta_.resize(nb_);
    gamma_.resize(ng_);
    for (int i = 0; i < na_; ++i) alpha_[i] = kTwoPi * i / (na_ - 1);
    for (int i = 0; i < nb_; ++i) beta_[i] = kPi * i / (nb_ - 1);
    for (int i = 0; i < ng_; ++i) gamma_[i] = kTwoPi * i / (ng_ - 1);
    wa_ = detail::simpson_weights(na_, alpha_[1] - alpha_[0]);
    wg_ = detail::simpson_weights(ng_, gamma_[1] - gamma_[0]);
    if (scheme_ == BetaScheme::kClenshawCurtis) {
      wb_ = detail::clenshaw_curtis_weights(nb_);
    } else {
      wb_ = detail::simpson_weights(nb_, beta_[1] - beta_[0]);
      for (int i = 0; i < nb_; ++i) wb_[i] *= std::sin(beta_[i]);
    }
  }

  int n_alpha() const { return na_; }
  int n_beta() const { return nb_; }
  int n_gamma() const { return ng_; }
  BetaScheme beta_scheme() const { return scheme_; }
  std::size_t size() const {
    return std::size_t(na_) * std::size_t(nb_) * std::size_t(ng_);
  }

  double alpha(int i) const { return alpha_[i]; }
  double beta(int i) const { return beta_[i]; }
  double gamma(int i) const { return gamma_[i]; }
  double weight_alpha(int i) const { return wa_[i]; }
  double weight_beta(int i) const { return wb_[i]; }
  double weight_gamma(int i) const { return wg_[i]; }

  /// Normalized Haar weight of node (ia,ib,ig); the full set sums to 1.
  double weight(int ia, int ib, int ig) const {
    return wa_[ia] * wb_[ib] * wg_[ig] / (8.0 * kPi * kPi);
  }

  std::size_t index(int ia, int ib, int ig) const {
    return (std::size_t(ia) * nb_ + ib) * ng_ + ig;
  }

  Euler313 euler(int ia, int ib, int ig) const {
    return Euler313{alpha_[ia], beta_[ib], gamma_[ig]};
  }

  Rotation rotation(int ia, int ib, int ig) const {
    return euler313_to_rotation(euler(ia, ib, ig));
  }

  double weight_sum() const {
    double s = 0.0;
    for (int ia = 0; ia < na_; ++ia)
      for (int ib = 0; ib < nb_; ++ib)
        for (int ig = 0; ig < ng_; ++ig) s += weight(ia, ib, ig);
    return s;
  }

 private:
  int na_, nb_, ng_;
  BetaScheme scheme_;
  std::vector<double> alpha_, beta_, gamma_, wa_, wb_, wg_;
};

/// U^l_{mn}(R) = i^{m-n} e^{-i(m alpha + n gamma)} d^l_{mn}(cos beta).
inline Eigen::MatrixXcd irrep(int l, const Rotation& R) {
  const Euler313 e = rotation_to_euler313(R);
  const WignerTable d(l, e.beta);
  Eigen::MatrixXcd U(2 * l + 1, 2 * l + 1);
  for (int m = -l; m <= l; ++m) {
    for (int n = -l; n <= l; ++n) {
      U(m + l, n + l) = detail::ipow(m - n) *
                        std::exp(Complex(0.0, -(m * e.alpha + n * e.gamma))) *
                        d(l, m, n);
    }
  }
  return U;
}

/// Fourier coefficient matrices P^l, l = 0..L.
struct So3Spectrum {
  int L = 0;
  std::vector<Eigen::MatrixXcd> P;  // P[l] is (2l+1) x (2l+1)

  explicit So3Spectrum(int bandlimit = 0) : L(bandlimit) {
    P.reserve(L + 1);
    for (int l = 0; l <= L; ++l) {
      P.emplace_back(Eigen::MatrixXcd::Zero(2 * l + 1, 2 * l + 1));
    }
  }

  double squared_norm(int l) const { return P[l].squaredNorm(); }
  double total_squared_norm() const {
    double s = 0.0;
    for (const auto& m : P) s += m.squaredNorm();
    return s;
  }
};

/// P^l = sum_nodes w f(node) U^l(R(node)^{-1}), computed in separable stages
/// (gamma, then alpha, then beta) so the cost is O(N^3 L + N^2 L^2).
/// Throws BandlimitTooHighForGrid when n_beta < 2L+1.
inline So3Spectrum forward_transform(const std::vector<double>& samples,
                                     int L, const So3Quadrature& q,
                                     int workers = 1) {
  if (q.n_beta() < 2 * L + 1) {
    throw BandlimitTooHighForGrid(
        "forward_transform: n_beta < 2L+1 would alias the spectrum");
  }
  if (samples.size() != q.size()) {
    throw ConfigError("forward_transform: sample count does not match grid");
  }
  const int na = q.n_alpha(), nb = q.n_beta(), ng = q.n_gamma();
  const int W = 2 * L + 1;
  // stage 1: G1(ia, ib, m) = sum_ig wg f e^{i m gamma}
  std::vector<Complex> g1(std::size_t(na) * nb * W);
  parallel_for(std::size_t(na) * nb, workers,
               [&](std::size_t b, std::size_t e) {
    for (std::size_t ab = b; ab < e; ++ab) {
      const int ia = int(ab / nb), ib = int(ab % nb);
      for (int m = -L; m <= L; ++m) {
        Complex acc(0.0, 0.0);
        for (int ig = 0; ig < ng; ++ig) {
          acc += q.weight_gamma(ig) * samples[q.index(ia, ib, ig)] *
                 std::exp(Complex(0.0, m * q.gamma(ig)));
        }
        g1[(ab * W) + (m + L)] = acc;
      }
    }
  });
  // stage 2: G2(ib, n, m) = sum_ia wa G1 e^{i n alpha}
  std::vector<Complex> g2(std::size_t(nb) * W * W, Complex(0.0, 0.0));
  parallel_for(std::size_t(nb), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t ib = b; ib < e; ++ib) {
      for (int n = -L; n <= L; ++n) {
        for (int ia = 0; ia < na; ++ia) {
          const Complex ph = q.weight_alpha(ia) *
                             std::exp(Complex(0.0, n * q.alpha(ia)));
          const std::size_t base = (std::size_t(ia) * nb + ib) * W;
          for (int m = -L; m <= L; ++m) {
            g2[(ib * W + (n + L)) * W + (m + L)] += ph * g1[base + (m + L)];
          }
        }
      }
    }
  });
  // stage 3: contract beta with (-i)^{n-m} d^l_{nm}
  So3Spectrum out(L);
  for (int ib = 0; ib < nb; ++ib) {
    const WignerTable d(L, q.beta(ib));
    const double wb = q.weight_beta(ib) / (8.0 * kPi * kPi);
    for (int l = 0; l <= L; ++l) {
      for (int m = -l; m <= l; ++m) {
        for (int n = -l; n <= l; ++n) {
          out.P[l](m + l, n + l) += wb * detail::ipow(-(n - m)) *
                                    d(l, n, m) *
                                    g2[(std::size_t(ib) * W + (n + L)) * W +
                                       (m + L)];
        }
      }
    }
  }
  return out;
}

/// Truncated Peter-Weyl sum  sum_l (2l+1) tr(P^l U^l(R)).
inline Complex inverse_transform_complex(const So3Spectrum& s,
                                         const Rotation& R) {
  const Euler313 e = rotation_to_euler313(R);
  const WignerTable d(s.L, e.beta);
  Complex acc(0.0, 0.0);
  for (int l = 0; l <= s.L; ++l) {
    Complex tr(0.0, 0.0);
    for (int m = -l; m <= l; ++m) {
      for (int n = -l; n <= l; ++n) {
        // U_{nm} entry multiplies P_{mn} in the trace
        tr += s.P[l](m + l, n + l) * detail::ipow(n - m) *
              std::exp(Complex(0.0, -(n * e.alpha + m * e.gamma))) *
              d(l, n, m);
      }
    }
    acc += (2.0 * l + 1.0) * tr;
  }
  return acc;
}

inline double inverse_transform(const So3Spectrum& s, const Rotation& R) {
  return inverse_transform_complex(s, R).real();
}

/// Evaluate the truncated sum at every node of a grid.
inline std::vector<double> synthesize(const So3Spectrum& s,
                                      const So3Quadrature& q,
                                      int workers = 1) {
  std::vector<double> out(q.size());
  const int nb = q.n_beta(), ng = q.n_gamma();
  parallel_for(q.size(), workers, [&](std::size_t b, std::size_t e) {
    int last_ib = -1;
    std::unique_ptr<WignerTable> d;
    for (std::size_t idx = b; idx < e; ++idx) {
      const int ia = int(idx / (std::size_t(nb) * ng));
      const int ib = int((idx / ng) % nb);
      const int ig = int(idx % ng);
      if (ib != last_ib) {
        d = std::make_unique<WignerTable>(s.L, q.beta(ib));
        last_ib = ib;
      }
      Complex acc(0.0, 0.0);
      for (int l = 0; l <= s.L; ++l) {
        Complex tr(0.0, 0.0);
        for (int m = -l; m <= l; ++m) {
          for (int n = -l; n <= l; ++n) {
            tr += s.P[l](m + l, n + l) * detail::ipow(n - m) *
                  std::exp(Complex(0.0,
                                   -(n * q.alpha(ia) + m * q.gamma(ig)))) *
                  (*d)(l, n, m);
          }
        }
        acc += (2.0 * l + 1.0) * tr;
      }
      out[idx] = acc.real();
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Spectrum serialization: magic, bandlimit, then row-major complex matrices
// per degree, little-endian 64-bit floats.

inline constexpr char kSpectrumMagic[8] = {'S', 'O', '3', 'S', 'P', 'E', 'C',
                                           '1'};

inline void write_spectrum(const So3Spectrum& s, std::ostream& os) {
  os.write(kSpectrumMagic, 8);
  const std::int64_t L = s.L;
  os.write(reinterpret_cast<const char*>(&L), 8);
  for (int l = 0; l <= s.L; ++l) {
    for (int m = 0; m < 2 * l + 1; ++m) {
      for (int n = 0; n < 2 * l + 1; ++n) {
        const double re = s.P[l](m, n).real();
        const double im = s.P[l](m, n).imag();
        os.write(reinterpret_cast<const char*>(&re), 8);
        os.write(reinterpret_cast<const char*>(&im), 8);
      }
    }
  }
}

inline So3Spectrum read_spectrum(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != std::string(kSpectrumMagic, 8)) {
    throw ConfigError("read_spectrum: bad magic");
  }
  std::int64_t L = 0;
  is.read(reinterpret_cast<char*>(&L), 8);
  if (!is || L < 0 || L > 1000) {
    throw ConfigError("read_spectrum: bad bandlimit");
  }
  So3Spectrum s{int(L)};
  for (int l = 0; l <= s.L; ++l) {
    for (int m = 0; m < 2 * l + 1; ++m) {
      for (int n = 0; n < 2 * l + 1; ++n) {
        double re = 0.0, im = 0.0;
        is.read(reinterpret_cast<char*>(&re), 8);
        is.read(reinterpret_cast<char*>(&im), 8);
        s.P[l](m, n) = Complex(re, im);
      }
    }
  }
  if (!is) throw ConfigError("read_spectrum: truncated stream");
  return s;
}

/// Human-readable export, one line per coefficient.
inline void write_spectrum_text(const So3Spectrum& s, std::ostream& os) {
  os << "# so3 spectrum, bandlimit " << s.L << "\n";
  os << "# l m n re im\n";
  os.precision(17);
  for (int l = 0; l <= s.L; ++l) {
    for (int m = -l; m <= l; ++m) {
      for (int n = -l; n <= l; ++n) {
        os << l << " " << m << " " << n << " " << s.P[l](m + l, n + l).real()
           << " " << s.P[l](m + l, n + l).imag() << "\n";
      }
    }
  }
}

}  // namespace so3prop
