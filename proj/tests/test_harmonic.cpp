#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "so3prop/harmonic.hpp"

using namespace so3prop;

namespace {
std::mt19937 rng(2026);

Rotation random_rotation() {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> a(0.0, kPi - 0.05);
  return exp_so3(a(rng) * Vec3(n(rng), n(rng), n(rng)).normalized());
}

So3Spectrum random_spectrum(int L) {
  std::normal_distribution<double> n(0.0, 1.0);
  So3Spectrum s(L);
  for (int l = 0; l <= L; ++l) {
    for (int m = -l; m <= l; ++m) {
      for (int nn = -l; nn <= l; ++nn) {
        s.P[l](m + l, nn + l) = Complex(n(rng), n(rng));
      }
    }
  }
  // real-valued synthesis requires P^l_{mn} = (-1)^{m-n} conj(P^l_{-m,-n})
  for (int l = 0; l <= L; ++l) {
    Eigen::MatrixXcd sym = s.P[l];
    for (int m = -l; m <= l; ++m) {
      for (int nn = -l; nn <= l; ++nn) {
        const double sign = ((m - nn) % 2 == 0) ? 1.0 : -1.0;
        sym(m + l, nn + l) =
            0.5 * (s.P[l](m + l, nn + l) +
                   sign * std::conj(s.P[l](-m + l, -nn + l)));
      }
    }
    s.P[l] = sym;
  }
  return s;
}
}  // namespace

TEST_CASE("quadrature weights sum to one (Clenshaw-Curtis beta)") {
  for (int n : {9, 17, 33}) {
    const So3Quadrature q(n, n, n);
    REQUIRE(q.weight_sum() == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("quadrature integrates low-order Wigner products exactly") {
  // int |U^l_{mn}|^2 dHaar = 1/(2l+1); spot-check l = 1, m = n = 0
  const So3Quadrature q(17, 17, 17);
  double acc = 0.0;
  for (int ia = 0; ia < q.n_alpha(); ++ia)
    for (int ib = 0; ib < q.n_beta(); ++ib)
      for (int ig = 0; ig < q.n_gamma(); ++ig) {
        const double d = std::cos(q.beta(ib));
        acc += q.weight(ia, ib, ig) * d * d;
      }
  REQUIRE(acc == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("node counts must be odd") {
  REQUIRE_THROWS_AS(So3Quadrature(8, 9, 9), ConfigError);
  REQUIRE_THROWS_AS(So3Quadrature(9, 9, 2), ConfigError);
}

TEST_CASE("irreps are unitary") {
  for (int i = 0; i < 20; ++i) {
    const Rotation R = random_rotation();
    for (int l = 0; l <= 6; ++l) {
      const Eigen::MatrixXcd U = irrep(l, R);
      REQUIRE((U * U.adjoint() -
               Eigen::MatrixXcd::Identity(2 * l + 1, 2 * l + 1))
                  .norm() < 1e-12);
    }
  }
}

TEST_CASE("irreps are homomorphisms") {
  for (int i = 0; i < 20; ++i) {
    const Rotation a = random_rotation(), b = random_rotation();
    for (int l = 0; l <= 6; ++l) {
      REQUIRE((irrep(l, a * b) - irrep(l, a) * irrep(l, b)).norm() < 1e-10);
    }
  }
}

TEST_CASE("irrep characters match the rotation-angle formula") {
  // tr U^l(R) = sin((2l+1) th/2) / sin(th/2) for rotation angle th
  for (int i = 0; i < 20; ++i) {
    std::uniform_real_distribution<double> u(0.1, kPi - 0.1);
    const double th = u(rng);
    std::normal_distribution<double> nd(0.0, 1.0);
    const Rotation R =
        exp_so3(th * Vec3(nd(rng), nd(rng), nd(rng)).normalized());
    for (int l = 0; l <= 5; ++l) {
      const Complex tr = irrep(l, R).trace();
      const double ref =
          std::sin((2.0 * l + 1.0) * th / 2.0) / std::sin(th / 2.0);
      REQUIRE(std::abs(tr - Complex(ref, 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("forward transform of a band-limited function recovers its "
          "coefficients") {
  const int L = 3;
  const So3Quadrature q(15, 15, 15);
  const So3Spectrum s = random_spectrum(L);
  const std::vector<double> samples = synthesize(s, q);
  const So3Spectrum back = forward_transform(samples, L, q);
  for (int l = 0; l <= L; ++l) {
    REQUIRE((back.P[l] - s.P[l]).norm() < 1e-11);
  }
}

TEST_CASE("pointwise inverse matches synthesis off the grid") {
  const So3Spectrum s = random_spectrum(2);
  for (int i = 0; i < 10; ++i) {
    const Rotation R = random_rotation();
    const Complex z = inverse_transform_complex(s, R);
    REQUIRE(std::abs(z.imag()) < 1e-10);  // Hermitian spectrum: real values
    REQUIRE(inverse_transform(s, R) == z.real());
  }
}

TEST_CASE("transform is deterministic across worker counts") {
  const So3Quadrature q(17, 17, 17);
  std::vector<double> samples(q.size());
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : samples) v = n(rng);
  const So3Spectrum s1 = forward_transform(samples, 4, q, 1);
  const So3Spectrum s3 = forward_transform(samples, 4, q, 3);
  for (int l = 0; l <= 4; ++l) {
    REQUIRE((s1.P[l] - s3.P[l]).norm() == 0.0);
  }
}

TEST_CASE("bandlimit above grid resolution is rejected") {
  const So3Quadrature q(9, 9, 9);
  std::vector<double> samples(q.size(), 1.0);
  REQUIRE_THROWS_AS(forward_transform(samples, 5, q),
                    BandlimitTooHighForGrid);
  REQUIRE_NOTHROW(forward_transform(samples, 4, q));
}

TEST_CASE("constant function transforms to the delta spectrum") {
  const So3Quadrature q(17, 17, 17);
  std::vector<double> samples(q.size(), 1.0);
  const So3Spectrum s = forward_transform(samples, 4, q);
  REQUIRE(std::abs(s.P[0](0, 0) - Complex(1.0, 0.0)) < 1e-12);
  for (int l = 1; l <= 4; ++l) REQUIRE(s.P[l].norm() < 1e-12);
}

TEST_CASE("spectrum serialization round trip is bit exact") {
  const So3Spectrum s = random_spectrum(4);
  std::stringstream ss;
  write_spectrum(s, ss);
  const So3Spectrum back = read_spectrum(ss);
  REQUIRE(back.L == s.L);
  for (int l = 0; l <= s.L; ++l) {
    REQUIRE((back.P[l] - s.P[l]).norm() == 0.0);
  }
  std::stringstream bad("garbage stream");
  REQUIRE_THROWS_AS(read_spectrum(bad), ConfigError);
}

TEST_CASE("text export lists every coefficient") {
  const So3Spectrum s = random_spectrum(2);
  std::stringstream ss;
  write_spectrum_text(s, ss);
  std::string line;
  int lines = 0;
  while (std::getline(ss, line)) ++lines;
  REQUIRE(lines == 2 + 1 + 9 + 25);  // two headers + coefficient rows
}
