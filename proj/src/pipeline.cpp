#include "geolab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <string>
#include <utility>

#include "geolab/errors.hpp"
#include "geolab/io.hpp"

namespace geolab {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void require_sweep(const ExperimentConfig& c) {
  require_list(c, "epsilons");
  if (c.epsilons.size() < 3) fail(ErrorCode::config, "'epsilons' needs at least 3 entries");
}

std::string tag(double v) { return io::format_double(v); }

void write_json(const fs::path& file, const json& j) { io::write_atomic(file, j.dump(2) + "\n"); }

json header(const Workspace& ws, std::string_view command) {
  json j;
  j["generated_at"] = timestamp_utc();
  j["command"] = std::string(command);
  j["config"] = to_json(ws.config());
  return j;
}

SuiteEntry check(PropertyResult r, json extra = json::object()) {
  for (auto it = extra.begin(); it != extra.end(); ++it) r.details[it.key()] = it.value();
  return SuiteEntry{std::move(r), false};
}

SuiteEntry control(PropertyResult r, std::string name) {
  r.name = std::move(name);
  return SuiteEntry{std::move(r), true};
}

void append(SuiteReport& into, SuiteReport from) {
  for (auto& e : from.entries) into.entries.push_back(std::move(e));
}

// Two distinct admissible potentials with M(b) > M(a); the configured
// endpoints when they differ.
std::pair<PeriodicField, PeriodicField> control_endpoints(const Workspace& ws) {
  const Background& bg = ws.background();
  PeriodicField a = ws.endpoint_0();
  PeriodicField b = ws.endpoint_1();
  auto entropy_energy = [&](const PeriodicField& u) {
    return 0.5 * bg.S() * energy(bg, u) - energy_alpha(u, bg.r()) + entropy(bg, u);
  };
  if (std::abs(entropy_energy(b) - entropy_energy(a)) < 1e-8) {
    const FourierTerm t{1, kCanonicalAmplitude, 0.0};
    const PeriodicField dir = fourier_field(bg.grid(), std::span(&t, 1));
    double lambda = 1.0;
    while (!is_admissible(bg, a + lambda * dir)) lambda *= 0.5;
    b = a + lambda * dir;
  }
  if (entropy_energy(b) < entropy_energy(a)) std::swap(a, b);
  return {a, b};
}

// phi_a + g(s) (phi_b - phi_a) with g = 4 s (1 - s): leaves phi_a, turns at
// phi_b, comes back. The Mabuchi trace is concave around s = 1/2.
PathField control_path(const Workspace& ws) {
  const ExperimentConfig& c = ws.config();
  const auto [a, b] = control_endpoints(ws);
  std::vector<PeriodicField> slices;
  for (int j = 0; j <= c.n_time; ++j) {
    const double s = static_cast<double>(j) / c.n_time;
    slices.push_back(a + (4.0 * s * (1.0 - s)) * (b - a));
  }
  return PathField::from_slices(slices);
}

std::vector<FunctionalTrace> eps_A_traces(const Background& bg, const std::vector<EpsGeodesic>& solves,
                                          const TruncationSpec& spec) {
  std::vector<FunctionalTrace> out;
  for (const auto& eg : solves) out.push_back(mabuchi_eps_A(bg, eg, spec));
  return out;
}

std::vector<double> levels_or_default(const ExperimentConfig& c) {
  return c.A_list.empty() ? std::vector<double>{2, 5, 10, 20} : c.A_list;
}

json bound_stats_json(const BoundStats& s) {
  return {{"sup_phi", s.sup_phi}, {"neg_eps_inf_phi", s.neg_eps_inf_phi}, {"max_eps_d2_phi", s.max_eps_d2_phi}};
}

json bounds_json(const FiberFamily& fam, const BoundReport& r) {
  json per = json::array();
  for (std::size_t e = 0; e < r.stats.size(); ++e) {
    json row = json::array();
    for (const auto& s : r.stats[e]) row.push_back(bound_stats_json(s));
    per.push_back({{"epsilon", fam.epsilons[e]}, {"per_delta", row}});
  }
  json j;
  j["stats"] = per;
  j["family_max"] = bound_stats_json(r.family_max);
  j["first_half_max"] = bound_stats_json(r.first_half_max);
  j["second_half_max"] = bound_stats_json(r.second_half_max);
  j["pass"] = r.pass;
  j["margin"] = r.margin;
  return j;
}

}  // namespace

Workspace::Workspace(ExperimentConfig cfg)
    : cfg_(std::move(cfg)), bg_(cfg_.background()), phi0_(cfg_.endpoint_0()), phi1_(cfg_.endpoint_1()) {}

const WeakGeodesic& Workspace::weak() {
  if (!weak_) {
    require_sweep(cfg_);
    weak_ = std::make_unique<WeakGeodesic>(weak_geodesic(bg_, phi0_, phi1_, cfg_.epsilons, cfg_.n_time));
  }
  return *weak_;
}

const WeakGeodesic& Workspace::weak_refined() {
  if (!weak_refined_) {
    require_sweep(cfg_);
    weak_refined_ =
        std::make_unique<WeakGeodesic>(weak_geodesic(bg_, phi0_, phi1_, cfg_.epsilons, cfg_.n_time_refined));
  }
  return *weak_refined_;
}

const FiberFamily& Workspace::family() {
  if (!family_) {
    require_list(cfg_, "deltas");
    const PathField& path = weak().path();
    family_ = std::make_unique<FiberFamily>(solve_family(bg_, path, cfg_.epsilons, cfg_.deltas));
  }
  return *family_;
}

const std::optional<PathField>& Workspace::oracle() {
  if (!oracle_) {
    try {
      oracle_.emplace(legendre_oracle(bg_, phi0_, phi1_, cfg_.n_time));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::non_convex_input) throw;
      oracle_.emplace(std::nullopt);
    }
  }
  return *oracle_;
}

MabuchiVariant parse_variant(std::string_view name) {
  if (name == "exact") return MabuchiVariant::exact;
  if (name == "k") return MabuchiVariant::k;
  if (name == "epsA") return MabuchiVariant::epsA;
  fail(ErrorCode::config, "unknown variant '" + std::string(name) + "' (exact, k, epsA)");
}

Suite parse_suite(std::string_view name) {
  if (name == "entropy") return Suite::entropy;
  if (name == "convexity") return Suite::convexity;
  if (name == "curvature") return Suite::curvature;
  if (name == "bounds") return Suite::bounds;
  if (name == "all") return Suite::all;
  fail(ErrorCode::config, "unknown suite '" + std::string(name) + "' (entropy, convexity, curvature, bounds, all)");
}

std::string_view to_string(MabuchiVariant v) {
  switch (v) {
    case MabuchiVariant::exact: return "exact";
    case MabuchiVariant::k: return "k";
    case MabuchiVariant::epsA: return "epsA";
  }
  return "exact";
}

std::string_view to_string(Suite s) {
  switch (s) {
    case Suite::entropy: return "entropy";
    case Suite::convexity: return "convexity";
    case Suite::curvature: return "curvature";
    case Suite::bounds: return "bounds";
    case Suite::all: return "all";
  }
  return "all";
}

bool SuiteReport::checks_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const SuiteEntry& e) { return e.control || e.ok(); });
}

bool SuiteReport::controls_fail() const {
  return std::all_of(entries.begin(), entries.end(), [](const SuiteEntry& e) { return !e.control || e.ok(); });
}

SuiteReport entropy_suite(Workspace& ws) {
  const ExperimentConfig& c = ws.config();
  const Background& bg = ws.background();
  const SpatialGrid grid = bg.grid();
  const int count = grid.size() / 4;
  const PeriodicField chi = c.chi_field();
  const std::vector<double> levels = levels_or_default(c);
  SuiteReport rep;

  for (int i = 0; i < c.n_seeds; ++i) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(i);
    const DensitySequence seq = random_oscillating_sequence(bg, seed, count);
    rep.entries.push_back(check(entropy_semicontinuity(bg, seq), {{"seed", seed}}));
    rep.entries.push_back(check(truncated_semicontinuity_sweep(bg, seq, chi, levels), {{"seed", seed}}));
  }
  const DensitySequence uniform =
      oscillating_sequence(bg, PeriodicField::constant(grid, 1.0 / integrate(bg.w())), 0.5, count);
  rep.entries.push_back(check(entropy_semicontinuity(bg, uniform), {{"sequence", "uniform_a0.5"}}));
  rep.entries.push_back(check(truncated_semicontinuity_sweep(bg, uniform, chi, levels), {{"sequence", "uniform_a0.5"}}));

  if (chi.sup_norm() == 0.0) {
    double worst = 0.0;
    json per = json::array();
    for (double A : levels) {
      const double d = delta_A(bg, TruncationSpec{A, chi}).delta;
      const double closed = (A + 2.0) * std::exp(-A) * integrate(bg.w());
      worst = std::max(worst, std::abs(d - closed));
      per.push_back({{"A", A}, {"delta", d}, {"closed_form", closed}});
    }
    const double d20 = delta_A(bg, TruncationSpec{20.0, chi}).delta;
    json d;
    d["levels"] = per;
    d["delta_20"] = d20;
    rep.entries.push_back(check(make_result("delta_A_closed_form", std::min(1e-12 - worst, 1e-7 - d20), d)));
  }

  // Constant members against a nonconstant "limit": gap H(1) - H(f) < 0.
  {
    const PeriodicField raw = PeriodicField::sample(grid, [](double x) { return 1.0 + 0.5 * std::cos(kTwoPi * x); });
    const PeriodicField f = (1.0 / integrate(raw * bg.w())) * raw;
    const PeriodicField one = PeriodicField::constant(grid, 1.0 / integrate(bg.w()));
    DensitySequence bad{f, std::vector<PeriodicField>(8, one), std::max(f.max(), one.max())};
    rep.entries.push_back(control(entropy_semicontinuity(bg, bad), "control/entropy_semicontinuity"));
    rep.entries.push_back(control(truncated_semicontinuity(bg, bad, TruncationSpec{20.0, chi}),
                                  "control/truncated_semicontinuity"));
  }
  return rep;
}

SuiteReport convexity_suite(Workspace& ws) {
  const ExperimentConfig& c = ws.config();
  const Background& bg = ws.background();
  require_list(c, "k_list");
  require_list(c, "truncation.A");
  const WeakGeodesic& wg = ws.weak();
  const PathField& path = wg.path();
  const FiberFamily& fam = ws.family();
  const WeakGeodesic& refined = ws.weak_refined();
  SuiteReport rep;

  for (int k : c.k_list)
    if (static_cast<std::size_t>(k) <= fam.n_eps()) rep.entries.push_back(check(convexity_inequality_k(bg, path, fam, k)));

  ContinuityOptions opt;
  opt.k_list = c.k_list;
  opt.convexity_tol = c.tolerances.convexity;
  opt.k_convexity_tol = c.tolerances.k_convexity;
  opt.gap_abs_tol = c.tolerances.gap_abs;
  rep.entries.push_back(check(mabuchi_convexity_and_continuity(bg, path, &refined.path(), fam, opt)));

  const PeriodicField chi = c.chi_field();
  for (double A : c.A_list)
    rep.entries.push_back(check(mabuchi_eps_A_almost_convex(eps_A_traces(bg, wg.solves, TruncationSpec{A, chi}),
                                                            c.tolerances.C_A_bound)));

  const PathField bent = control_path(ws);
  const std::vector<double> head(c.epsilons.begin(), c.epsilons.begin() + 3);
  const FiberFamily bent_family = solve_family(bg, bent, head, c.deltas);
  rep.entries.push_back(control(convexity_inequality_k(bg, bent, bent_family, 1), "control/convexity_inequality_k"));
  ContinuityOptions bare = opt;
  bare.k_list.clear();
  rep.entries.push_back(control(mabuchi_convexity_and_continuity(bg, bent, nullptr, fam, bare),
                                "control/mabuchi_convexity_and_continuity"));
  std::vector<EpsGeodesic> fake;
  for (const auto& eg : wg.solves) fake.push_back(EpsGeodesic{bent, eg.epsilon, 0.0, 0.0, 0.0, 0, {}});
  rep.entries.push_back(control(
      mabuchi_eps_A_almost_convex(eps_A_traces(bg, fake, TruncationSpec{c.A_list.front(), chi}),
                                  c.tolerances.C_A_bound),
      "control/mabuchi_eps_A_almost_convex"));
  return rep;
}

PathField ddc_test_path(const PeriodicField& phi0, const PeriodicField& phi1, int n_time) {
  const FourierTerm t{1, 0.0, kCanonicalAmplitude};
  const PeriodicField bump = fourier_field(phi0.grid(), std::span(&t, 1));
  std::vector<PeriodicField> slices;
  for (int j = 0; j <= n_time; ++j) {
    const double s = static_cast<double>(j) / n_time;
    slices.push_back((1.0 - s) * phi0 + s * phi1 + (s * (1.0 - s)) * bump);
  }
  return PathField::from_slices(slices);
}

SuiteReport curvature_suite(Workspace& ws) {
  const ExperimentConfig& c = ws.config();
  const Background& bg = ws.background();
  require_list(c, "curvature.epsilons");
  SuiteReport rep;
  CurvatureOptions opt;
  opt.kappa = c.kappa;

  std::vector<EpsGeodesic> solved;
  for (double eps : c.curvature_epsilons) {
    solved.push_back(solve_eps_geodesic({bg, ws.endpoint_0(), ws.endpoint_1(), eps, c.n_time}));
    rep.entries.push_back(check(eps_curvature_identity(bg, solved.back(), opt), {{"epsilon", eps}}));
    rep.entries.push_back(check(eps_geodesic_residual_c(bg, solved.back()), {{"epsilon", eps}}));
  }

  const std::vector<double> tau = default_time_bump(c.n_time);
  const PathField smooth = ddc_test_path(ws.endpoint_0(), ws.endpoint_1(), c.n_time);
  auto ddc_result = [&](const PathField& p) {
    const DdcEnergyReport r = ddc_energy_check(bg, p, tau);
    return make_result("ddc_energy_identity", 1e-3 - r.relative_discrepancy,
                       {{"lhs", r.lhs}, {"rhs", r.rhs}, {"relative_discrepancy", r.relative_discrepancy}});
  };
  rep.entries.push_back(check(ddc_result(smooth)));

  const PathField& P = solved.front().path;
  const PeriodicField u = P.slice(c.n_time / 4);
  const PeriodicField v0 = P.slice(3 * c.n_time / 4);
  const PeriodicField v = v0 + PeriodicField::constant(bg.grid(), integrate(u - v0));
  rep.entries.push_back(check(max_subharmonic_lemma(bg, u, v)));
  rep.entries.push_back(check(max_subharmonic_lemma(bg, v, u)));

  const auto [ca, cb] = control_endpoints(ws);
  const EpsGeodesicProblem cp{bg, ca, cb, c.curvature_epsilons.front(), c.n_time};
  const EpsGeodesic target = sup_distance(ws.endpoint_0(), ws.endpoint_1()) > 0.0 ? solved.front()
                                                                                   : solve_eps_geodesic(cp);
  CurvatureOptions wrong = opt;
  wrong.kappa = 4.0 * opt.kappa;
  rep.entries.push_back(control(eps_curvature_identity(bg, target, wrong), "control/eps_curvature_identity"));
  EpsGeodesic unsolved = target;
  unsolved.path = eps_geodesic_initial_guess(cp);
  rep.entries.push_back(control(eps_geodesic_residual_c(bg, unsolved), "control/eps_geodesic_residual_c"));

  // Alternating-sign rows: the discrete s-derivatives no longer resolve the path.
  {
    const FourierTerm t{1, kCanonicalAmplitude, 0.0};
    const PeriodicField wiggle = fourier_field(bg.grid(), std::span(&t, 1));
    std::vector<PeriodicField> rows;
    for (int j = 0; j <= c.n_time; ++j) {
      const double sign = (j == 0 || j == c.n_time) ? 0.0 : (j % 2 ? 0.2 : -0.2);
      rows.push_back(smooth.slice(j) + sign * wiggle);
    }
    rep.entries.push_back(control(ddc_result(PathField::from_slices(rows)), "control/ddc_energy_identity"));
  }
  {
    const double sigma = std::abs(central2_symbol(1, bg.grid().spacing()));
    const double amp = 2.0 * bg.w().max() / sigma;
    const PeriodicField bad = PeriodicField::sample(bg.grid(), [&](double x) { return amp * std::cos(kTwoPi * x); }) +
                              PeriodicField::constant(bg.grid(), v.max() + 1.0);
    rep.entries.push_back(control(max_subharmonic_lemma(bg, bad, v, 1e-9, false), "control/max_subharmonic_lemma"));
  }
  return rep;
}

SuiteReport bounds_suite(Workspace& ws) {
  const Background& bg = ws.background();
  const FiberFamily& fam = ws.family();
  const PathField& path = ws.weak().path();
  SuiteReport rep;

  const BoundReport b = check_bounds(fam);
  rep.entries.push_back(check(make_result("fiber_bounds_uniform", b.margin, bounds_json(fam, b))));

  const std::vector<PeriodicField> tests = default_test_set(bg.grid());
  auto density_result = [&](const FiberFamily& f, const PathField& p) {
    const ConvergenceReport r = density_convergence(bg, f, p, tests);
    return make_result("density_convergence", r.margin, {{"max_error", r.max_error}, {"mass_error", r.mass_error}});
  };
  rep.entries.push_back(check(density_result(fam, path)));

  auto vanishing_result = [&](const FiberFamily& f) {
    const VanishingReport v = eps_phi_vanishing(f);
    return make_result("eps_phi_vanishing", v.margin, {{"sup_eps_phi", v.sup_eps_phi}});
  };
  rep.entries.push_back(check(vanishing_result(fam)));

  double worst = 0.0;
  for (const auto& per_eps : fam.solutions)
    for (const auto& per_delta : per_eps)
      for (const auto& s : per_delta) worst = std::max(worst, s.residual_sup);
  rep.entries.push_back(check(make_result("fiber_residuals", kFiberTolerance - worst, {{"max_residual", worst}})));

  auto shifted = [&](auto shift) {
    FiberFamily f = fam;
    for (std::size_t e = 0; e < f.n_eps(); ++e)
      for (auto& per_delta : f.solutions[e])
        for (auto& s : per_delta) s.phi = s.phi + shift(f.epsilons[e]);
    return f;
  };
  const PeriodicField cosx = PeriodicField::sample(bg.grid(), [](double x) { return std::cos(kTwoPi * x); });
  const FiberFamily blown = shifted([&](double eps) { return (0.1 / eps) * cosx; });
  rep.entries.push_back(control(make_result("fiber_bounds_uniform", check_bounds(blown).margin), "control/fiber_bounds_uniform"));
  rep.entries.push_back(control(density_result(fam, control_path(ws)), "control/density_convergence"));
  const FiberFamily lifted = shifted([&](double eps) { return PeriodicField::constant(bg.grid(), 0.5 / eps); });
  rep.entries.push_back(control(vanishing_result(lifted), "control/eps_phi_vanishing"));
  return rep;
}

SuiteReport run_suite(Workspace& ws, Suite suite) {
  switch (suite) {
    case Suite::entropy: return entropy_suite(ws);
    case Suite::convexity: return convexity_suite(ws);
    case Suite::curvature: return curvature_suite(ws);
    case Suite::bounds: return bounds_suite(ws);
    case Suite::all: break;
  }
  SuiteReport all;
  for (Suite s : {Suite::entropy, Suite::convexity, Suite::curvature, Suite::bounds}) append(all, run_suite(ws, s));
  return all;
}

json trace_meta(const FunctionalTrace& tr) {
  json j;
  j["name"] = tr.name;
  j["times"] = tr.times;
  j["values"] = tr.values;
  json sd = json::array();
  for (double v : tr.second_differences) {
    if (std::isnan(v))
      sd.push_back(nullptr);
    else
      sd.push_back(v);
  }
  j["second_differences"] = sd;
  j["energy_part"] = tr.energy_part;
  j["entropy_part"] = tr.entropy_part;
  j["scale"] = tr.scale();
  j["min_second_difference"] = tr.min_second_difference();
  j["meta"] = tr.meta;
  return j;
}

std::string trace_to_csv(const FunctionalTrace& tr) {
  std::string out = "t,value,second_difference\n";
  for (std::size_t i = 0; i < tr.values.size(); ++i) {
    out += io::format_double(tr.times[i]) + "," + io::format_double(tr.values[i]) + ",";
    if (!std::isnan(tr.second_differences[i])) out += io::format_double(tr.second_differences[i]);
    out += "\n";
  }
  return out;
}

json to_json(const SuiteReport& report, Suite suite) {
  json j;
  j["suite"] = std::string(to_string(suite));
  j["checks_pass"] = report.checks_pass();
  j["controls_fail"] = report.controls_fail();
  json arr = json::array();
  for (const auto& e : report.entries) {
    json r = to_json(e.result);
    r["control"] = e.control;
    r["as_expected"] = e.ok();
    arr.push_back(std::move(r));
  }
  j["results"] = std::move(arr);
  return j;
}

json run_geodesic(Workspace& ws, const fs::path& out_dir) {
  const fs::path dir = out_dir / "geodesic";
  const WeakGeodesic& wg = ws.weak();
  json j = header(ws, "geodesic");
  json files = json::array();
  std::vector<double> eps, residuals, certificates, margins;
  std::vector<int> iters;
  for (const auto& s : wg.solves) {
    const std::string name = "path_eps_" + tag(s.epsilon) + ".csv";
    io::write_atomic(dir / name, io::path_to_csv(s.path));
    files.push_back(name);
    eps.push_back(s.epsilon);
    iters.push_back(s.newton_iters);
    residuals.push_back(s.residual_sup);
    certificates.push_back(s.certificate_residual);
    margins.push_back(s.positivity_margin);
  }
  j["n_points"] = ws.config().n_points;
  j["n_time"] = ws.config().n_time;
  j["epsilons"] = eps;
  j["newton_iters"] = iters;
  j["residuals"] = residuals;
  j["certificate_residuals"] = certificates;
  j["positivity_margins"] = margins;
  j["increments"] = wg.increments;
  const auto& oracle = ws.oracle();
  if (oracle) {
    std::vector<double> dist;
    for (const auto& s : wg.solves) dist.push_back(sup_distance(s.path, *oracle));
    j["oracle_distance"] = dist;
    io::write_atomic(dir / "oracle.csv", io::path_to_csv(*oracle));
    files.push_back("oracle.csv");
  } else {
    j["oracle_distance"] = nullptr;
  }
  j["files"] = files;
  write_json(dir / "convergence.json", j);
  return j;
}

json run_fiberwise(Workspace& ws, const fs::path& out_dir) {
  const fs::path dir = out_dir / "fiberwise";
  const FiberFamily& fam = ws.family();
  const PathField& path = ws.weak().path();
  json j = header(ws, "fiberwise");
  j["epsilons"] = fam.epsilons;
  j["deltas"] = fam.deltas;
  j["times"] = fam.times;
  j["bounds"] = bounds_json(fam, check_bounds(fam));

  json residuals = json::array(), iters = json::array();
  for (const auto& per_eps : fam.solutions) {
    json r = json::array(), it = json::array();
    for (const auto& per_delta : per_eps) {
      double worst = 0.0;
      int most = 0;
      for (const auto& s : per_delta) {
        worst = std::max(worst, s.residual_sup);
        most = std::max(most, s.newton_iters);
      }
      r.push_back(worst);
      it.push_back(most);
    }
    residuals.push_back(r);
    iters.push_back(it);
  }
  j["residuals"] = residuals;
  j["newton_iters"] = iters;
  j["cauchy_increments"] = fam.cauchy_increments;
  j["slack_constants"] = fam.slack_constants;
  j["equicontinuity"] = fam.equicontinuity;
  j["equicontinuity_constant"] = fam.equicontinuity_constant;
  const ConvergenceReport dc = density_convergence(ws.background(), fam, path, default_test_set(fam.grid));
  j["density_convergence"] = {{"max_error", dc.max_error}, {"mass_error", dc.mass_error},
                              {"pass", dc.pass}, {"margin", dc.margin}};
  const VanishingReport v = eps_phi_vanishing(fam);
  j["vanishing"] = {{"sup_eps_phi", v.sup_eps_phi}, {"pass", v.pass}, {"margin", v.margin}};

  json files = json::array();
  for (std::size_t e = 0; e < fam.n_eps(); ++e) {
    std::vector<PeriodicField> slices;
    for (std::size_t t = 0; t < fam.n_times(); ++t) slices.push_back(fam.phi(e, t));
    const std::string name = "phi_eps_" + tag(fam.epsilons[e]) + ".csv";
    io::write_atomic(dir / name, io::path_to_csv(PathField::from_slices(slices)));
    files.push_back(name);
  }
  j["files"] = files;
  write_json(dir / "family.json", j);
  return j;
}

json run_mabuchi(Workspace& ws, MabuchiVariant variant, const fs::path& out_dir) {
  const fs::path dir = out_dir / "mabuchi";
  const ExperimentConfig& c = ws.config();
  const Background& bg = ws.background();
  if (variant == MabuchiVariant::k) {
    require_sweep(c);
    require_list(c, "k_list");
    require_list(c, "deltas");
  } else if (variant == MabuchiVariant::epsA) {
    require_sweep(c);
    require_list(c, "truncation.A");
  }
  json j = header(ws, "mabuchi");
  j["variant"] = std::string(to_string(variant));
  json files = json::array();
  auto emit = [&](const FunctionalTrace& tr, const std::string& stem) {
    io::write_atomic(dir / (stem + ".csv"), trace_to_csv(tr));
    json meta = header(ws, "mabuchi");
    meta["variant"] = std::string(to_string(variant));
    meta["trace"] = trace_meta(tr);
    write_json(dir / (stem + ".json"), meta);
    files.push_back(stem + ".csv");
    files.push_back(stem + ".json");
  };

  switch (variant) {
    case MabuchiVariant::exact: {
      FunctionalTrace tr = mabuchi(bg, ws.weak().path());
      tr.meta["epsilon_min"] = ws.weak().epsilon_min();
      emit(tr, "mabuchi_exact");
      break;
    }
    case MabuchiVariant::k: {
      const FiberFamily& fam = ws.family();
      for (int k : c.k_list) {
        if (static_cast<std::size_t>(k) > fam.n_eps())
          fail(ErrorCode::config, "k_list entry " + std::to_string(k) + " exceeds the number of epsilons");
        emit(mabuchi_k(bg, ws.weak().path(), fam, k), "mabuchi_k_" + std::to_string(k));
      }
      json b = header(ws, "mabuchi");
      b["bounds"] = bounds_json(fam, check_bounds(fam));
      write_json(dir / "family_bounds.json", b);
      files.push_back("family_bounds.json");
      break;
    }
    case MabuchiVariant::epsA: {
      const PeriodicField chi = c.chi_field();
      json constants = json::array();
      for (double A : c.A_list) {
        const TruncationSpec spec{A, chi};
        std::vector<double> C;
        for (const auto& eg : ws.weak().solves) {
          const FunctionalTrace tr = mabuchi_eps_A(bg, eg, spec);
          C.push_back(almost_convexity_constant(tr, eg.epsilon));
          emit(tr, "mabuchi_epsA_eps_" + tag(eg.epsilon) + "_A_" + tag(A));
        }
        constants.push_back({{"A", A}, {"C_hat", C}});
      }
      j["almost_convexity"] = constants;
      break;
    }
  }
  j["files"] = files;
  write_json(dir / ("mabuchi_" + std::string(to_string(variant)) + ".json"), j);
  return j;
}

SuiteReport run_verify(Workspace& ws, Suite suite, const fs::path& out_dir) {
  SuiteReport rep = run_suite(ws, suite);
  json j = header(ws, "verify");
  const json body = to_json(rep, suite);
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  write_json(out_dir / ("verify_" + std::string(to_string(suite)) + ".json"), j);
  return rep;
}

SuiteReport run_study(Workspace& ws, const fs::path& out_dir) {
  const json g = run_geodesic(ws, out_dir);
  const json f = run_fiberwise(ws, out_dir);
  json mab = json::array();
  for (MabuchiVariant v : {MabuchiVariant::exact, MabuchiVariant::k, MabuchiVariant::epsA})
    mab.push_back(run_mabuchi(ws, v, out_dir)["files"]);
  SuiteReport rep = run_verify(ws, Suite::all, out_dir);
  json j = header(ws, "study");
  j["geodesic"] = g["files"];
  j["fiberwise"] = f["files"];
  j["mabuchi"] = mab;
  j["verify"] = "verify_all.json";
  j["checks_pass"] = rep.checks_pass();
  j["controls_fail"] = rep.controls_fail();
  write_json(out_dir / "study.json", j);
  return rep;
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace geolab
