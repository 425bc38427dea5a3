#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "pmrd/nonlinearity.hpp"

using namespace pmrd;

namespace {

// Independent Romberg quadrature oracle (no shared code with the library path
// under test, which uses closed forms / adaptive Simpson).
double romberg(const std::function<double(double)>& f, double a, double b, int levels = 20) {
  std::vector<double> row(levels), prev(levels);
  double h = b - a;
  prev[0] = 0.5 * h * (f(a) + f(b));
  for (int i = 1; i < levels; ++i) {
    h *= 0.5;
    double sum = 0.0;
    long pts = 1L << (i - 1);
    for (long k = 0; k < pts; ++k) sum += f(a + (2 * k + 1) * h);
    row[0] = 0.5 * prev[0] + h * sum;
    double p4 = 4.0;
    for (int j = 1; j <= i; ++j) {
      row[j] = (p4 * row[j - 1] - prev[j - 1]) / (p4 - 1.0);
      p4 *= 4.0;
    }
    if (i > 3 && std::abs(row[i] - prev[i - 1]) < 1e-13 * (std::abs(row[i]) + 1)) return row[i];
    std::swap(row, prev);
  }
  return prev[levels - 1];
}

double biofilm_integrand(double a, double b, double s) {
  return std::pow(s, b) * std::pow(1.0 - s, -a);
}

}  // namespace

TEST_CASE("phi biofilm closed form vs oracle") {
  auto p11 = PhiSpec::biofilm(1, 1);
  CHECK(p11.value(0.0) == 0.0);
  CHECK(p11.value(0.5) == doctest::Approx(-0.5 - std::log(0.5)).epsilon(1e-12));

  auto p22 = PhiSpec::biofilm(2, 2);
  double oracle = romberg([](double s) { return biofilm_integrand(2, 2, s); }, 0.0, 0.9);
  CHECK(p22.value(0.9) == doctest::Approx(oracle).epsilon(1e-8));

  // several integer exponent combinations against the oracle
  for (auto [a, b] : {std::pair{1.0, 2.0}, {3.0, 1.0}, {2.0, 3.0}}) {
    auto p = PhiSpec::biofilm(a, b);
    for (double z : {0.2, 0.5, 0.85}) {
      double ref = romberg([a, b](double s) { return biofilm_integrand(a, b, s); }, 0.0, z);
      CHECK(p.value(z) == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("phi non-integer exponents use quadrature") {
  auto p = PhiSpec::biofilm(1.5, 0.5);
  for (double z : {0.3, 0.7, 0.95}) {
    double ref = romberg([](double s) { return biofilm_integrand(1.5, 0.5, s); }, 0.0, z);
    CHECK(p.value(z) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("phi odd extension and domain errors") {
  auto p = PhiSpec::biofilm(1, 1);
  CHECK(p.value(-0.5) == doctest::Approx(-p.value(0.5)));
  CHECK_THROWS_AS(p.value(1.0), std::domain_error);
  CHECK_THROWS_AS(p.value(-1.2), std::domain_error);
}

TEST_CASE("phi primitive") {
  auto p = PhiSpec::biofilm(1, 1);
  CHECK(p.primitive(0.0) == 0.0);
  // phi(s) = -s - log(1-s); nested oracle
  double ref = romberg([](double s) { return -s - std::log1p(-s); }, 0.0, 0.5);
  CHECK(p.primitive(0.5) == doctest::Approx(ref).epsilon(1e-10));
  // Phi(z) >= phi(z/2) z/2 by monotonicity of the integrand
  for (double z : {0.1, 0.5, 0.9, 0.99})
    CHECK(p.primitive(z) >= p.value(z / 2) * z / 2);
  // even in z under odd extension
  CHECK(p.primitive(-0.7) == doctest::Approx(p.primitive(0.7)));
}

TEST_CASE("phi derivative and inverse") {
  auto p = PhiSpec::biofilm(2, 2);
  CHECK(p.derivative(0.0) == 0.0);
  CHECK(p.derivative(0.5) == doctest::Approx(0.25 / 0.25));
  for (double z : {0.1, 0.4, 0.8, -0.3}) {
    CHECK(p.inverse(p.value(z)) == doctest::Approx(z).epsilon(1e-10));
  }
}

TEST_CASE("phi validate accepts shipped kinds") {
  CHECK_NOTHROW(PhiSpec::biofilm(1, 1).validate());
  CHECK_NOTHROW(PhiSpec::biofilm(2, 2).validate());
  CHECK_NOTHROW(PhiSpec::power(2).validate());
  // a non-monotone custom function must be rejected
  auto bad = PhiSpec::custom([](double z) { return z * z * z - 0.5 * z; },
                             [](double z) { return 3 * z * z - 0.5; },
                             [](double z) { return 0.25 * std::pow(z, 4) - 0.25 * z * z; },
                             false, "bad");
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("power phi") {
  auto p = PhiSpec::power(2);
  CHECK(p.value(0.5) == doctest::Approx(0.25));
  CHECK(p.value(-0.5) == doctest::Approx(-0.25));
  CHECK(p.derivative(0.5) == doctest::Approx(1.0));
  CHECK(p.primitive(0.5) == doctest::Approx(0.125 / 3));
}

TEST_CASE("regularize slope bounds and floor") {
  auto spec = PhiSpec::biofilm(1, 1);
  auto pr = regularize(spec, 10.0);
  CHECK(pr.slope_floor() > 0.0);
  CHECK(pr.derivative(0.0) >= pr.slope_floor());
  for (int i = -200; i <= 200; ++i) {
    double z = i / 100.0;  // slope bounds hold on all of R
    double d = pr.derivative(z);
    CHECK(d >= pr.slope_floor() * (1 - 1e-12));
    CHECK(d <= pr.slope_cap() * (1 + 1e-12));
  }
  CHECK_THROWS_AS(regularize(spec, 1.0), std::invalid_argument);
}

TEST_CASE("regularize additive closeness bound") {
  auto spec = PhiSpec::biofilm(1, 1);
  for (double R : {10.0, 100.0, 1000.0}) {
    auto pr = regularize(spec, R);
    for (int i = -400; i <= 400; ++i) {
      double z = (1.0 - 1.0 / R) * i / 400.0;
      CHECK(std::abs(pr.value(z)) <= std::abs(spec.value(z)) + std::abs(z) / R + 1e-12);
    }
  }
  auto pr10 = regularize(spec, 10.0);
  CHECK(std::abs(pr10.value(0.5)) <= std::abs(spec.value(0.5)) + 0.05 + 1e-12);
}

TEST_CASE("regularize uniform convergence monotone in R") {
  auto spec = PhiSpec::biofilm(1, 1);
  double prev_sup = 1e300;
  for (double R : {10.0, 100.0, 1000.0}) {
    auto pr = regularize(spec, R);
    double sup = 0.0;
    for (int i = -400; i <= 400; ++i) {
      double z = 0.8 * i / 400.0;
      sup = std::max(sup, std::abs(pr.value(z) - spec.value(z)));
    }
    CHECK(sup < prev_sup);
    prev_sup = sup;
  }
  CHECK(prev_sup < 1e-2);
}

TEST_CASE("regularized phi internal consistency") {
  auto pr = regularize(PhiSpec::biofilm(1, 1), 100.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int k = 0; k < 200; ++k) {
    double z = U(rng);
    // derivative matches finite difference of value
    double h = 1e-6;
    double fd = (pr.value(z + h) - pr.value(z - h)) / (2 * h);
    CHECK(pr.derivative(z) == doctest::Approx(fd).epsilon(5e-4));
    // value matches finite difference of primitive
    double fdp = (pr.primitive(z + h) - pr.primitive(z - h)) / (2 * h);
    CHECK(pr.value(z) == doctest::Approx(fdp).epsilon(5e-4).scale(1.0));
  }
  // convexity inequality used by the energy identity:
  // Phi_R(y) - Phi_R(z) <= (y - z) phi_R(y) for all y, z
  for (int k = 0; k < 500; ++k) {
    double y = U(rng), z = U(rng);
    CHECK(pr.primitive(y) - pr.primitive(z) <= (y - z) * pr.value(y) + 1e-12);
  }
  // monotone, odd, and invertible
  CHECK(pr.value(-0.7) == doctest::Approx(-pr.value(0.7)));
  for (double z : {-1.2, -0.3, 0.0, 0.5, 0.999, 1.3})
    CHECK(pr.inverse(pr.value(z)) == doctest::Approx(z).epsilon(1e-9).scale(1.0));
}

TEST_CASE("reaction eval") {
  auto mon = ReactionSpec::monod(1, 0, 1, 1);
  auto v = mon.eval(0.5, 1.0);
  CHECK(v.f == doctest::Approx(0.25));
  CHECK(v.g == doctest::Approx(-0.25));
  CHECK(mon.eval(0.0, 0.7).f == 0.0);
  CHECK_THROWS_AS(mon.eval(1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(mon.eval(0.5, 1.5), std::domain_error);

  auto dec = ReactionSpec::scalar_decay(2.0);
  CHECK(dec.eval(0.3).f == doctest::Approx(-0.6));
  CHECK_NOTHROW(mon.validate());
}

TEST_CASE("reaction derivatives match finite differences") {
  auto mon = ReactionSpec::monod(1.2, 0.4, 0.9, 0.5);
  double u = 0.4, v = 0.6, h = 1e-6;
  CHECK(mon.f_u(u, v) == doctest::Approx((mon.eval(u + h, v).f - mon.eval(u - h, v).f) / (2 * h)));
  CHECK(mon.f_v(u, v) == doctest::Approx((mon.eval(u, v + h).f - mon.eval(u, v - h).f) / (2 * h)));
  CHECK(mon.g_u(u, v) == doctest::Approx((mon.eval(u + h, v).g - mon.eval(u - h, v).g) / (2 * h)));
  CHECK(mon.g_v(u, v) == doctest::Approx((mon.eval(u, v + h).g - mon.eval(u, v - h).g) / (2 * h)));
}

TEST_CASE("lipschitz bound") {
  CHECK(lipschitz_bound(ReactionSpec::scalar_decay(2.0)) == 2.0);
  CHECK(lipschitz_bound(ReactionSpec::monod(0, 0, 0, 1)) == 0.0);
  // dominates sampled difference quotients for the unit-parameter case
  auto mon = ReactionSpec::monod(1, 1, 1, 1);
  double L = lipschitz_bound(mon);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> Uu(0.0, 0.999), Uv(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    double u1 = Uu(rng), u2 = Uu(rng), v1 = Uv(rng), v2 = Uv(rng);
    auto a = mon.eval(u1, v1), b = mon.eval(u2, v2);
    double num = std::abs(a.f - b.f) + std::abs(a.g - b.g);
    double den = std::abs(u1 - u2) + std::abs(v1 - v2);
    if (den > 1e-9) CHECK(num <= L * den * (1 + 1e-9));
  }
}

TEST_CASE("f_sup bounds") {
  auto mon = ReactionSpec::monod(1, 0.5, 2, 1);
  double sup = mon.f_sup();
  for (int i = 0; i <= 50; ++i)
    for (int j = 0; j <= 50; ++j) {
      double u = 0.999 * i / 50.0, v = double(j) / 50.0;
      CHECK(std::abs(mon.eval(u, v).f) <= sup + 1e-12);
    }
}
