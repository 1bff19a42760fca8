#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "vp/error.hpp"
#include "vp/linalg.hpp"

using vp::RealMatrix;
using vptest::frob;
using vptest::gaussian_matrix;
using vptest::max_abs_diff;

namespace {

RealMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  return RealMatrix(rows);
}

void check_qr(const RealMatrix& m) {
  const auto f = vp::qr_decompose(m);
  const std::size_t n = m.cols();
  const RealMatrix qtq = vp::transpose(f.q) * f.q;
  CHECK(frob(qtq - RealMatrix::identity(n)) <= 1e-10 * static_cast<double>(n));
  for (std::size_t i = 0; i < f.r.rows(); ++i) {
    CHECK(f.r(i, i) >= 0.0);
    for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(f.r(i, j)) <= 1e-12);
  }
  CHECK(frob(f.q * f.r - m) <= 1e-9 * frob(m));
}

}  // namespace

TEST_CASE("qr of identity is trivial") {
  const auto f = vp::qr_decompose(RealMatrix::identity(4));
  CHECK(max_abs_diff(f.q, RealMatrix::identity(4)) <= 1e-15);
  CHECK(max_abs_diff(f.r, RealMatrix::identity(4)) <= 1e-15);
}

TEST_CASE("qr of a permutation has positive diagonal") {
  const RealMatrix m = from_rows({{0, 1}, {1, 0}});
  const auto f = vp::qr_decompose(m);
  CHECK(f.r(0, 0) > 0.0);
  CHECK(f.r(1, 1) > 0.0);
  CHECK(frob(vp::transpose(f.q) * f.q - RealMatrix::identity(2)) <= 1e-12);
  check_qr(m);
}

TEST_CASE("qr reconstructs seeded random matrices") {
  std::mt19937_64 eng(7);
  check_qr(gaussian_matrix(8, 8, eng));
  // Tall extended matrices as used by the MMSE problem.
  check_qr(gaussian_matrix(16, 8, eng));
}

TEST_CASE("qr property sweep over sizes 2..16") {
  std::mt19937_64 eng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 15);
    const RealMatrix m = gaussian_matrix(n, n, eng);
    check_qr(m);
    const auto f = vp::qr_decompose(m);
    const RealMatrix l = vp::lower_from_r_inverse(f.r);
    CHECK(frob(l * vp::transpose(f.r) - RealMatrix::identity(n)) <= 1e-9);
  }
}

TEST_CASE("qr rejects rank-deficient input") {
  const RealMatrix m = from_rows({{1, 2}, {2, 4}});
  try {
    (void)vp::qr_decompose(m);
    FAIL("expected RankDeficient");
  } catch (const vp::Error& e) {
    CHECK(e.kind() == vp::ErrorKind::RankDeficient);
  }
}

TEST_CASE("lower_from_r_inverse examples") {
  const RealMatrix l1 = vp::lower_from_r_inverse(from_rows({{2, 0}, {0, 4}}));
  CHECK(max_abs_diff(l1, from_rows({{0.5, 0}, {0, 0.25}})) == 0.0);
  const RealMatrix l2 = vp::lower_from_r_inverse(from_rows({{1, 1}, {0, 1}}));
  CHECK(max_abs_diff(l2, from_rows({{1, 0}, {-1, 1}})) <= 1e-15);
  CHECK(max_abs_diff(vp::lower_from_r_inverse(RealMatrix::identity(6)), RealMatrix::identity(6)) ==
        0.0);
  CHECK_THROWS_AS(vp::lower_from_r_inverse(from_rows({{1, 1}, {0, 0}})), vp::Error);
}

TEST_CASE("pseudo_inverse examples") {
  CHECK(max_abs_diff(vp::pseudo_inverse(RealMatrix::identity(4), 0.0), RealMatrix::identity(4)) <=
        1e-15);
  CHECK(max_abs_diff(vp::pseudo_inverse(2.0 * RealMatrix::identity(2), 0.0),
                     0.5 * RealMatrix::identity(2)) <= 1e-15);
  CHECK(max_abs_diff(vp::pseudo_inverse(RealMatrix::identity(2), 1.0),
                     0.5 * RealMatrix::identity(2)) <= 1e-15);
}

TEST_CASE("pseudo_inverse with zero regularization inverts well-conditioned matrices") {
  std::mt19937_64 eng(13);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 10);
    const RealMatrix m = gaussian_matrix(n, n, eng);
    const auto sv = vp::singular_values(m);
    if (sv.back() <= 0.0 || sv.front() / sv.back() >= 1e6) continue;
    ++checked;
    CHECK(frob(vp::pseudo_inverse(m, 0.0) * m - RealMatrix::identity(n)) <= 1e-8);
  }
  CHECK(checked > 250);
}

TEST_CASE("pseudo_inverse of a singular matrix without regularization fails") {
  const RealMatrix m = from_rows({{1, 2}, {2, 4}});
  try {
    (void)vp::pseudo_inverse(m, 0.0);
    FAIL("expected Singular");
  } catch (const vp::Error& e) {
    CHECK(e.kind() == vp::ErrorKind::Singular);
  }
  // Regularized Gram matrix is always solvable.
  CHECK_NOTHROW(vp::pseudo_inverse(m, 0.5));
}

TEST_CASE("singular value examples") {
  const auto a = vp::singular_values(from_rows({{3, 0}, {0, 1}}));
  REQUIRE(a.size() == 2);
  CHECK(a[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(1.0).epsilon(1e-14));
  const auto b = vp::singular_values(from_rows({{0, 2}, {1, 0}}));
  CHECK(b[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(b[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("singular values preserve the Frobenius norm and are sorted") {
  std::mt19937_64 eng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t r = 2 + static_cast<std::size_t>(trial % 9);
    const std::size_t c = 2 + static_cast<std::size_t>((trial / 9) % 9);
    const RealMatrix m = gaussian_matrix(r, c, eng);
    const auto sv = vp::singular_values(m);
    double sum = 0.0;
    for (std::size_t i = 0; i < sv.size(); ++i) {
      CHECK(sv[i] >= 0.0);
      if (i > 0) CHECK(sv[i] <= sv[i - 1]);
      sum += sv[i] * sv[i];
    }
    const double f = vp::frobenius_norm_sq(m);
    CHECK(std::abs(sum - f) <= 1e-9 * f);
  }
}

TEST_CASE("frobenius_norm_sq examples") {
  CHECK(vp::frobenius_norm_sq(RealMatrix::identity(4)) == 4.0);
  CHECK(vp::frobenius_norm_sq(RealMatrix(3, 3)) == 0.0);
  CHECK(vp::frobenius_norm_sq(from_rows({{1, 2}, {2, 1}})) == 10.0);
}

TEST_CASE("matrix construction rejects non-finite entries") {
  RealMatrix m(2, 2);
  CHECK_THROWS(m = from_rows({{1, std::nan("")}, {0, 1}}));
}
