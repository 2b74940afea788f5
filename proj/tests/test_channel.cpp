#include <doctest.h>

#include <cmath>
#include <complex>

#include "capa/channel.hpp"
#include "capa/rng.hpp"

using namespace capa;

TEST_SUITE_BEGIN("channel");

namespace {

PhysicalConfig paper_cfg() { return default_physical_config(2.4e9); }  // lambda 0.125

Point3 random_point(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

}  // namespace

TEST_CASE("boresight scalar channel value") {
  const PhysicalConfig cfg = paper_cfg();
  const std::complex<double> h = scalar_channel({0, 0, 25}, {0, 0, 0}, cfg);
  // 2 pi 25 / 0.125 = 400 pi: unit phase, so h = -j eta / (2 lambda 25)
  const double expected = cfg.impedance_eta / (2.0 * 0.125 * 25.0);
  CHECK(std::abs(h.real()) <= 1e-12 * expected);
  CHECK(h.imag() == doctest::Approx(-expected).epsilon(1e-12));
  CHECK(std::abs(h.imag()) == doctest::Approx(60.31857894892403).epsilon(1e-10));
}

TEST_CASE("projector annihilates the propagation direction") {
  const PhysicalConfig cfg = paper_cfg();
  const Eigen::Matrix3cd h = dyadic_green({0, 0, 25}, {0, 0, 0}, cfg);
  CHECK(std::abs(h(2, 2)) < 1e-12);          // zz entry vanishes on boresight
  CHECK(std::abs(h(1, 1).imag() + 60.31857894892403) < 1e-10);
  // polarization along the propagation direction: scalar channel is zero
  const std::complex<double> hy = scalar_channel({0, 3.0, 0}, {0, 0, 0}, cfg);
  CHECK(std::abs(hy) < 1e-12);
}

TEST_CASE("argument swap symmetry") {
  const PhysicalConfig cfg = paper_cfg();
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const Point3 r = random_point(rng, -3.0, 3.0);
    Point3 s = random_point(rng, 5.0, 9.0);
    const Eigen::Matrix3cd a = dyadic_green(r, s, cfg);
    const Eigen::Matrix3cd b = dyadic_green(s, r, cfg);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12 * a.cwiseAbs().maxCoeff());
    // the dyadic is also symmetric as a matrix
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() < 1e-12 * a.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("amplitude halves when boresight distance doubles at unit phase") {
  const PhysicalConfig cfg = paper_cfg();  // both 25 and 50 are multiples of lambda
  const auto h25 = scalar_channel({0, 0, 25}, {0, 0, 0}, cfg);
  const auto h50 = scalar_channel({0, 0, 50}, {0, 0, 0}, cfg);
  CHECK(std::abs(h25 / h50 - 2.0) < 1e-12);
}

TEST_CASE("magnitude bound eta / (2 lambda d)") {
  const PhysicalConfig cfg = paper_cfg();
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const Point3 r = random_point(rng, -2.0, 2.0);
    Point3 s = random_point(rng, 3.0, 8.0);
    const double d = std::sqrt((r.x - s.x) * (r.x - s.x) + (r.y - s.y) * (r.y - s.y) +
                               (r.z - s.z) * (r.z - s.z));
    const double bound = cfg.impedance_eta / (2.0 * cfg.wavelength() * d);
    CHECK(std::abs(scalar_channel(r, s, cfg)) <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("phase advances by -2 pi per wavelength along a fixed direction") {
  const PhysicalConfig cfg = paper_cfg();
  Rng rng(19);
  for (int i = 0; i < 50; ++i) {
    // fixed direction, distance t and t + lambda from the source
    double dx = rng.uniform(-1, 1), dy = rng.uniform(-1, 1), dz = rng.uniform(0.5, 1.5);
    const double norm = std::sqrt(dx * dx + dy * dy + dz * dz);
    dx /= norm;
    dy /= norm;
    dz /= norm;
    const double t = rng.uniform(10.0, 30.0);
    const double t2 = t + cfg.wavelength();
    const auto h1 = scalar_channel({t * dx, t * dy, t * dz}, {0, 0, 0}, cfg);
    const auto h2 = scalar_channel({t2 * dx, t2 * dy, t2 * dz}, {0, 0, 0}, cfg);
    // same projector, amplitude ratio t/t2, phase difference exactly -2 pi
    const std::complex<double> ratio = (h2 / h1) * (t2 / t);
    CHECK(std::abs(ratio - 1.0) < 1e-10);
  }
}

TEST_CASE("coincident points raise the singularity error") {
  const PhysicalConfig cfg = paper_cfg();
  CHECK_THROWS_AS(scalar_channel({1, 1, 1}, {1, 1, 1}, cfg), SingularityError);
  CHECK_THROWS_AS(dyadic_green({0, 0, 0}, {0, 0, 5e-10}, cfg), SingularityError);
}

TEST_CASE("channel_matrix matches pointwise evaluation") {
  const PhysicalConfig cfg = paper_cfg();
  const std::vector<Point3> rx = {{0, 0, 25}, {0.1, -0.2, 24.0}};
  const std::vector<Point3> tx = {{0, 0, 0}, {0.5, 0.5, 0}, {-1, 0.25, 0}};
  const Eigen::MatrixXcd h = channel_matrix(rx, tx, cfg);
  REQUIRE(h.rows() == 2);
  REQUIRE(h.cols() == 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(h(i, j) - scalar_channel(rx[i], tx[j], cfg)) == 0.0);
}

TEST_SUITE_END();
