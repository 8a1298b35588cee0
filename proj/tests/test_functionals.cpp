#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "geolab/errors.hpp"
#include "geolab/functionals.hpp"
#include "support.hpp"

using namespace geolab;
using namespace geolab::test;

namespace {

// int_0^1 (1 + cos/2) log(1 + cos/2), mpmath at 30 digits.
constexpr double kEntropyHalfCos = 0.0646381320204874430;
// Entropy of the Legendre geodesic between 0 and the canonical endpoint at s = 1/2 and 1/4:
// int g' log(g' / ((1 - s) g' + s)) dy with g' = 1 - 0.1 pi cos(2 pi y).
constexpr double kMidslice = 0.00638717327096640476;
constexpr double kQuarterSlice = 0.00162677518179635233;

// u with flat metric density 1 + b cos(2 pi x).
PeriodicField with_density_cos(const SpatialGrid& g, double b) {
  return cos_field(g, b / central2_symbol(1, g.spacing()));
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::precondition;
}

}  // namespace

TEST_SUITE("functionals") {

TEST_CASE("energy") {
  SpatialGrid g(128);
  Background bg = flat_background(g);
  CHECK(energy(bg, PeriodicField::constant(g, 1.3)) == doctest::Approx(2.6).epsilon(1e-15));
  CHECK(energy(bg, zero(g)) == 0.0);
  const double a = 0.003, sigma = central2_symbol(1, g.spacing());
  CHECK(energy(bg, cos_field(g, a)) == doctest::Approx(a * a * sigma / 2.0).epsilon(1e-12));
  CHECK(a * a * sigma / 2.0 == doctest::Approx(-a * a * kTwoPi * kTwoPi / 2.0).epsilon(1e-3));
  // E(u + c) = E(u) + 2c
  Background cbg = make_background(cos_field(g, 0.002, 2));
  PeriodicField u = canonical(g) + sin_field(g, 0.001, 3);
  CHECK(std::abs(energy(cbg, u + PeriodicField::constant(g, 0.25)) - energy(cbg, u) - 0.5) <= 1e-12);
}

TEST_CASE("Ricci energy") {
  SpatialGrid g(256);
  Background flat = flat_background(g);
  CHECK(energy_alpha(canonical(g), flat.r()) == 0.0);
  PeriodicField alpha = cos_field(g, 2.0) + PeriodicField::constant(g, 0.5);
  CHECK(energy_alpha(PeriodicField::constant(g, 3.0), alpha) == doctest::Approx(1.5).epsilon(1e-14));

  for (Scheme sc : {Scheme::central2, Scheme::spectral}) {
    Background bg = make_background(cos_field(g, 0.01), sc);
    PeriodicField c = cos_field(g, 1.0);
    // Summation by parts: int cos (-D^2 log w) = -int (D^2 cos) log w.
    PeriodicField logw = map(bg.w(), [](double v) { return std::log(v); });
    const double by_parts = -integrate(second_derivative(c, sc) * logw);
    CHECK(std::abs(energy_alpha(c, bg.r()) - by_parts) <= 1e-10);
  }
}

TEST_CASE("entropy") {
  SpatialGrid g(256);
  Background bg = flat_background(g);
  CHECK(entropy(bg, zero(g)) == 0.0);
  CHECK(entropy(bg, with_density_cos(g, 0.5)) == doctest::Approx(kEntropyHalfCos).epsilon(1e-12));
  // A node at -1e-3.
  PeriodicField bad = with_density_cos(g, 1.001);
  CHECK(code_of([&] { entropy(bg, bad); }) == ErrorCode::negative_density);
  // Degenerate densities are allowed: 0 log 0 = 0.
  PeriodicField degenerate = with_density_cos(g, 1.0);
  CHECK(std::isfinite(entropy(bg, degenerate)));
}

TEST_CASE("entropy is nonnegative and vanishes only at f = 1") {
  SpatialGrid g(128);
  Background bg = make_background(cos_field(g, 0.002, 2));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<FourierTerm> t{{1, 0.01 * d(rng), 0.01 * d(rng)}, {2, 0.002 * d(rng), 0.002 * d(rng)}};
    PeriodicField u = fourier_field(g, t);
    REQUIRE(is_admissible(bg, u));
    const double H = entropy(bg, u);
    CHECK(H >= 0.0);
    if (H < 1e-12) CHECK(sup_distance(metric_density(bg, u), bg.w()) < 1e-5);
  }
  PeriodicField tiny = cos_field(g, 1e-9);
  CHECK(entropy(bg, tiny) < 1e-12);
  CHECK((metric_density(bg, tiny) * map(bg.w(), [](double v) { return 1.0 / v; })).sup_norm() - 1.0 < 1e-5);
}

TEST_CASE("truncated entropy") {
  SpatialGrid g(128);
  Background bg = flat_background(g);
  CHECK(truncated_entropy(bg, zero(g), make_truncation(g, 5.0)) == 0.0);
  // Density with a zero set of positive measure.
  PeriodicField f = PeriodicField::sample(g, [](double x) { return x < 0.25 ? 0.0 : 4.0 / 3.0; });
  const double H = entropy_of_ratio(bg, f);
  for (double A : {1.0, 5.0, 10.0}) {
    const double HA = truncated_entropy_of_ratio(bg, f, make_truncation(g, A));
    CHECK(HA >= H);
    CHECK(HA == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-13));
  }
  PeriodicField degenerate = with_density_cos(g, 1.0);
  const double HA = truncated_entropy(bg, degenerate, make_truncation(g, 10.0));
  CHECK(std::isfinite(HA));
  CHECK(HA >= entropy(bg, degenerate));
  // Gap at most e^{-A} times the mass where f < e^{-A}.
  CHECK(HA - entropy(bg, degenerate) <= std::exp(-10.0) * 10.0);
  CHECK_THROWS_AS(truncated_entropy(bg, zero(g), make_truncation(g, 0.5)), Error);
}

TEST_CASE("delta(A)") {
  SpatialGrid g(64);
  Background bg = make_background(cos_field(g, 0.003));
  double prev = INFINITY;
  for (double A : {1.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
    DeltaA d = delta_A(bg, make_truncation(g, A));
    CHECK(std::abs(d.C1 - A * std::exp(-A)) <= 1e-12);
    CHECK(std::abs(d.C2 - 2.0 * std::exp(-A)) <= 1e-12);
    CHECK(std::abs(d.delta - (A + 2.0) * std::exp(-A)) <= 1e-12);
    CHECK(d.C1 > 0.0);
    CHECK(d.C2 > 0.0);
    CHECK(d.delta < prev);
    CHECK(delta_A(bg, make_truncation(g, 2 * A)).delta < d.delta);
    prev = d.delta;
  }
  CHECK(delta_A(bg, make_truncation(g, 20.0)).delta < 1e-7);
  TruncationSpec one{6.0, PeriodicField::constant(g, 1.0)};
  CHECK(std::abs(delta_A(bg, one).delta - delta_A(bg, make_truncation(g, 5.0)).delta) <= 1e-15);
}

TEST_CASE("Mabuchi on a constant path and its decomposition") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  FunctionalTrace t = mabuchi(bg, PathField::linear(zero(g), zero(g), 8));
  for (double v : t.values) CHECK(v == 0.0);
  CHECK(std::isnan(t.second_differences.front()));
  CHECK(std::isnan(t.second_differences.back()));

  Background cbg = make_background(cos_field(g, 0.002, 2));
  PathField p = PathField::linear(zero(g), canonical(g), 8);
  FunctionalTrace c = mabuchi(cbg, p);
  for (std::size_t j = 0; j < c.values.size(); ++j) {
    CHECK(c.values[j] == c.energy_part[j] + c.entropy_part[j]);
    const PeriodicField u = p.slice(static_cast<int>(j));
    CHECK(c.values[j] == doctest::Approx(-energy_alpha(u, cbg.r()) + entropy(cbg, u)).epsilon(1e-14));
  }
}

TEST_CASE("flat Mabuchi is the entropy and ignores constants") {
  SpatialGrid g(128);
  Background bg = flat_background(g);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<PeriodicField> slices;
  for (int k = 0; k < 10; ++k)
    slices.push_back(fourier_field(g, std::vector<FourierTerm>{{1, 0.01 * d(rng), 0.01 * d(rng)},
                                                               {3, 0.001 * d(rng), 0.0}}));
  PathField p = PathField::from_slices(slices);
  FunctionalTrace t = mabuchi(bg, p);
  for (int j = 0; j < 10; ++j) CHECK(t.values[j] == doctest::Approx(entropy(bg, slices[j])).epsilon(1e-15));
  std::vector<PeriodicField> shifted;
  for (const auto& s : slices) shifted.push_back(s + PeriodicField::constant(g, 4.2));
  FunctionalTrace u = mabuchi(bg, PathField::from_slices(shifted));
  for (int j = 0; j < 10; ++j) CHECK(std::abs(u.values[j] - t.values[j]) <= 1e-12);
}

TEST_CASE("Mabuchi along the Legendre geodesic matches the exact oracle") {
  SpatialGrid g(256);
  Background bg = flat_background(g);
  PathField o = legendre_oracle(bg, zero(g), canonical(g), 4);
  FunctionalTrace t = mabuchi(bg, o);
  CHECK(std::abs(t.values[2] - kMidslice) <= 1e-4);
  CHECK(std::abs(t.values[1] - kQuarterSlice) <= 1e-4);
}

TEST_CASE("Mabuchi reports the slice of a negative density") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  std::vector<PeriodicField> rows{zero(g), cos_field(g, 1.0), zero(g)};
  try {
    mabuchi(bg, PathField::from_slices(rows));
    FAIL("expected NegativeDensity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::negative_density);
    CHECK(std::string(e.what()).find("slice 1") != std::string::npos);
  }
}

TEST_CASE("Mabuchi_k") {
  SpatialGrid g(128);
  Background bg = flat_background(g);
  PathField zero_path = PathField::linear(zero(g), zero(g), 8);
  FiberFamily zf = solve_family(bg, zero_path, {0.1, 0.05, 0.025}, {0.05});
  FunctionalTrace z = mabuchi_k(bg, zero_path, zf, 3);
  for (double v : z.values) CHECK(std::abs(v) <= 1e-12);
  CHECK(code_of([&] { mabuchi_k(bg, zero_path, zf, 4); }) == ErrorCode::family_mismatch);
  CHECK(code_of([&] { mabuchi_k(bg, PathField::linear(zero(g), zero(g), 4), zf, 1); }) ==
        ErrorCode::family_mismatch);
  CHECK_THROWS_AS(mabuchi_k(bg, zero_path, zf, 0), Error);

  PathField o = legendre_oracle(bg, zero(g), canonical(g), 16);
  FiberFamily fam = solve_family(bg, o, {0.1, 0.05, 0.025}, {0.05, 0.025});
  FunctionalTrace k1 = mabuchi_k(bg, o, fam, 1), k2 = mabuchi_k(bg, o, fam, 2);
  double diff = 0.0;
  for (std::size_t j = 0; j < k1.values.size(); ++j) diff = std::max(diff, std::abs(k1.values[j] - k2.values[j]));
  CHECK(diff > 0.0);
  for (const auto* t : {&k1, &k2}) CHECK(t->min_second_difference() >= -1e-6 * std::max(1.0, t->scale()));
  CHECK(k2.meta["k"] == 2);
}

TEST_CASE("Mabuchi_{eps,A}") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  EpsGeodesic flat = solve_eps_geodesic({bg, zero(g), zero(g), 0.01, 16});
  for (double A : {1.0, 5.0}) {
    FunctionalTrace t = mabuchi_eps_A(bg, flat, make_truncation(g, A));
    for (double v : t.values) CHECK(std::abs(v) <= 1e-12);
  }
  EpsGeodesic eg = solve_eps_geodesic({bg, zero(g), canonical(g), 0.01, 16});
  FunctionalTrace t30 = mabuchi_eps_A(bg, eg, make_truncation(g, 30.0));
  FunctionalTrace exact = mabuchi(bg, eg.path);
  for (std::size_t j = 0; j < t30.values.size(); ++j) CHECK(std::abs(t30.values[j] - exact.values[j]) <= 1e-8);
  CHECK(t30.meta["epsilon"] == 0.01);
  CHECK(t30.meta["A"] == 30.0);
  CHECK_THROWS_AS(mabuchi_eps_A(bg, eg, make_truncation(g, 0.5)), Error);
}

TEST_CASE("ddc energy identity") {
  SpatialGrid g(256);
  Background bg = flat_background(g);
  const int nt = 64;
  auto tau = default_time_bump(nt);
  DdcEnergyReport flat = ddc_energy_check(bg, PathField::linear(canonical(g), canonical(g), nt), tau);
  CHECK(std::abs(flat.lhs) <= 1e-12);
  CHECK(std::abs(flat.rhs) <= 1e-12);

  std::vector<PeriodicField> rows;
  for (int j = 0; j <= nt; ++j) {
    const double s = j / static_cast<double>(nt);
    rows.push_back(cos_field(g, s * s * kCanonicalAmplitude));
  }
  DdcEnergyReport r = ddc_energy_check(bg, PathField::from_slices(rows), tau);
  CHECK(r.relative_discrepancy <= 1e-3);
  CHECK(std::abs(r.lhs) > 1e-6);

  std::vector<double> bad(nt + 1, 0.0);
  bad[1] = 1.0;
  CHECK_THROWS_AS(ddc_energy_check(bg, PathField::from_slices(rows), bad), Error);
}

TEST_CASE("trace bookkeeping") {
  FunctionalTrace t = make_trace("q", {0.0, 0.5, 1.0}, {1.0, 0.0, 1.0});
  CHECK(t.second_differences[1] == doctest::Approx(8.0));
  CHECK(t.scale() == 1.0);
  CHECK(t.min_second_difference() == doctest::Approx(8.0));
  CHECK_THROWS_AS(make_trace("q", {0.0, 0.0}, {1.0, 2.0}), Error);
}

}
