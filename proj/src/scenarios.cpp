#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "lattice/attractor.hpp"
#include "lattice/errors.hpp"
#include "lattice/experiments.hpp"
#include "lattice/parallel.hpp"
#include "lattice/random.hpp"

namespace lattice {

using nlohmann::json;

namespace {

// Index offsets inside the kSymbolSamples purpose, one block per consumer.
constexpr std::uint64_t kAbsorbingSymbols = 0;
constexpr std::uint64_t kTailSymbols = 10000;
constexpr std::uint64_t kAttractorSymbols = 20000;
constexpr std::uint64_t kForwardSymbols = 30000;

json constants_json(const DerivedConstants& c) {
  return {{"mu", c.mu},     {"theta1", c.theta1}, {"theta2", c.theta2}, {"delta1", c.delta1},
          {"delta2", c.delta2}, {"R0_sq", c.R0_sq}, {"R", c.R},         {"chi0", c.chi0},
          {"C0", c.C0},     {"L0", c.L0},         {"C1", c.C1},         {"T0", c.T0}};
}

struct Context {
  const ExperimentConfig& cfg;
  const ModelParams& p;
  DerivedConstants c;
  SeedTree tree;
  std::filesystem::path out;
  RunManifest& man;

  int window() const { return p.window_radius(); }
  std::size_t kappa() const { return static_cast<std::size_t>(p.kappa); }

  void emit(const CsvTable& table, const std::string& file) {
    emit_csv(table, out / file);
    man.outputs.push_back(file);
  }

  void record_streams(const char* what, StreamPurpose purpose, std::uint64_t first, std::uint64_t count) {
    man.substreams.push_back({{"use", what},
                              {"purpose", static_cast<std::uint64_t>(purpose)},
                              {"first_index", first},
                              {"count", count}});
  }

  std::vector<SystemState> ball(StreamPurpose purpose, std::size_t n, double radius, const char* what) {
    std::vector<SystemState> v;
    for (std::size_t i = 0; i < n; ++i) {
      auto rng = tree.stream(purpose, i);
      v.push_back(random_state_in_ball(window(), radius, rng));
    }
    record_streams(what, purpose, 0, n);
    return v;
  }

  std::vector<TorusPoint> symbols(std::uint64_t base, std::size_t n, const char* what) {
    std::vector<TorusPoint> v;
    for (std::size_t i = 0; i < n; ++i) {
      auto rng = tree.stream(kSymbolSamples, base + i);
      v.push_back(random_torus_point(kappa(), rng));
    }
    record_streams(what, kSymbolSamples, base, n);
    return v;
  }

  // Pairs inside B(0,R) with one symbol each, all drawn from one substream per pair.
  void pairs(StreamPurpose purpose, std::size_t n, std::vector<StatePair>& out, std::vector<TorusPoint>& syms,
             const char* what) {
    for (std::size_t i = 0; i < n; ++i) {
      auto rng = tree.stream(purpose, i);
      SystemState a = random_state_in_ball(window(), c.R, rng);
      SystemState b = random_state_in_ball(window(), c.R, rng);
      out.emplace_back(std::move(a), std::move(b));
      syms.push_back(random_torus_point(kappa(), rng));
    }
    record_streams(what, purpose, 0, n);
  }

  void fail(const std::string& msg) { man.failures.push_back(man.scenario + ": " + msg); }
};

void run_constants(Context& ctx) { ctx.emit(constants_table(ctx.c), "constants.csv"); }

void run_absorbing(Context& ctx) {
  const ExperimentSettings& e = ctx.cfg.experiment;
  const auto phis = ctx.ball(kAbsorbingInit, e.absorbing_samples, e.absorbing_radius, "absorbing initial states");
  const auto syms = ctx.symbols(kAbsorbingSymbols, e.absorbing_symbols, "absorbing symbols");
  IntegratorConfig ic = ctx.cfg.integrator;
  ic.record_stride = std::max<std::int64_t>(1, std::llround(e.absorbing_dt / ic.h));

  struct Member {
    AbsorbingReport report;
    std::vector<double> times, norms, bounds;
    double norm0_sq = 0.0;
  };
  const std::size_t np = phis.size();
  auto members = parallel_map(np * syms.size(), [&](std::size_t idx) {
    const Trajectory traj = evolve_process(syms[idx / np], phis[idx % np], e.absorbing_horizon, ic, ctx.p);
    Member m;
    m.report = absorbing_check(traj, ctx.p, ctx.c, ctx.cfg.tolerances);
    m.norm0_sq = traj.states.front().norm_sq();
    m.times = traj.times;
    for (const auto& s : traj.states) m.norms.push_back(s.norm_sq());
    for (double t : traj.times) m.bounds.push_back(norm_bound(m.norm0_sq, t, ctx.c));
    return m;
  });

  CsvTable curve{{"t", "norm_sq", "envelope"}, {}};
  const auto& times = members.front().times;
  for (std::size_t j = 0; j < times.size(); ++j) {
    double nsq = 0.0, env = 0.0;
    for (const auto& m : members) {
      nsq = std::max(nsq, m.norms[j]);
      env = std::max(env, m.bounds[j]);
    }
    curve.rows.push_back({times[j], nsq, env});
  }
  ctx.emit(curve, "absorbing.csv");

  CsvTable per{{"member", "symbol_index", "sample_index", "norm0_sq", "entry_time", "t_pred", "max_norm_excess",
                "max_energy_excess", "entered_by_prediction"},
               {}};
  bool envelope_ok = true, norm_ok = true, entered_ok = true;
  double worst_energy = -std::numeric_limits<double>::infinity();
  double latest_entry = 0.0;
  for (std::size_t idx = 0; idx < members.size(); ++idx) {
    const auto& r = members[idx].report;
    const double entry = r.entry_time ? *r.entry_time : std::numeric_limits<double>::quiet_NaN();
    per.rows.push_back({static_cast<double>(idx), static_cast<double>(idx / np), static_cast<double>(idx % np),
                        members[idx].norm0_sq, entry, r.t_pred, r.worst_norm_excess, r.worst_envelope_excess,
                        r.entered_by_prediction ? 1.0 : 0.0});
    envelope_ok = envelope_ok && r.envelope_ok;
    norm_ok = norm_ok && r.norm_bound_ok;
    entered_ok = entered_ok && r.entered_by_prediction;
    worst_energy = std::max(worst_energy, r.worst_envelope_excess);
    if (r.entry_time) latest_entry = std::max(latest_entry, *r.entry_time);
  }
  ctx.emit(per, "absorbing_members.csv");

  ctx.man.results = {{"members", members.size()},       {"envelope_ok", envelope_ok},
                     {"norm_bound_ok", norm_ok},        {"entered_by_prediction", entered_ok},
                     {"worst_energy_excess", worst_energy}, {"latest_entry_time", latest_entry}};
  if (!envelope_ok) ctx.fail("weighted energy exceeded the Gronwall envelope");
  if (!norm_ok) ctx.fail("squared norm exceeded the closed-form bound");
  if (!entered_ok) ctx.fail("a trajectory entered B(0,R) after the predicted time");
}

void run_tails(Context& ctx) {
  const ExperimentSettings& e = ctx.cfg.experiment;
  const auto phis = ctx.ball(kTailInit, e.tail_samples, ctx.c.R, "tail initial states");
  const auto syms = ctx.symbols(kTailSymbols, e.tail_samples, "tail symbols");
  const TailCheckResult res = tail_check(syms, phis, e.tail_times, e.tail_radii, e.tail_epsilon, ctx.cfg.integrator,
                                         ctx.p, ctx.c, ctx.cfg.tolerances);

  CsvTable t{{"t", "M", "tail", "bound"}, {}};
  for (const auto& r : res.reports) {
    t.rows.push_back({r.time, static_cast<double>(r.M), r.measured_tail, r.bound_transient + r.bound_steady});
  }
  ctx.emit(t, "tails.csv");

  const double steady_N = tail_constant(res.N, ctx.p, ctx.c) / (ctx.c.delta1 * ctx.c.theta1);
  CsvTable eps{{"epsilon", "N", "N1", "t1", "tail_at_t1", "steady_at_N", "half_eps_sq"},
               {{res.epsilon, static_cast<double>(res.N), static_cast<double>(res.N1), res.t1, res.tail_at_t1,
                 steady_N, 0.5 * res.epsilon * res.epsilon}}};
  ctx.emit(eps, "tails_epsilon.csv");

  ctx.man.results = {{"epsilon", res.epsilon},         {"N", res.N},
                     {"N1", res.N1},                   {"t1", res.t1},
                     {"tail_at_t1", res.tail_at_t1},   {"N1_within_window", res.N1 <= ctx.window()},
                     {"bounds_ok", res.bounds_ok},     {"epsilon_ok", res.epsilon_ok}};
  if (!res.bounds_ok) ctx.fail("measured tail exceeded the transient plus steady bound");
  if (!res.epsilon_ok) ctx.fail("tail beyond N1 at t1 exceeded epsilon^2");
}

void run_lipschitz(Context& ctx) {
  const ExperimentSettings& e = ctx.cfg.experiment;
  std::vector<StatePair> prs;
  std::vector<TorusPoint> syms;
  ctx.pairs(kLipschitzPairs, e.lipschitz_pairs, prs, syms, "Lipschitz pairs");
  std::vector<double> times = e.lipschitz_times;
  if (times.empty()) times = {ctx.c.T0, 1.0};
  const LipschitzReport rep = lipschitz_growth(syms, prs, times, ctx.cfg.integrator, ctx.p, ctx.c);

  CsvTable t{{"t", "max_ratio", "L_T"}, {}};
  for (std::size_t j = 0; j < rep.times.size(); ++j) t.rows.push_back({rep.times[j], rep.worst_ratio[j], rep.bound[j]});
  ctx.emit(t, "lipschitz.csv");
  ctx.man.results = {{"pairs", prs.size()}, {"ok", rep.ok}, {"max_ratio", rep.worst_ratio}, {"L_T", rep.bound}};
  if (!rep.ok) ctx.fail("difference growth exceeded L_T");
}

void run_squeezing(Context& ctx) {
  const ExperimentSettings& e = ctx.cfg.experiment;
  std::vector<StatePair> prs;
  std::vector<TorusPoint> syms;
  ctx.pairs(kSqueezePairs, e.squeeze_pairs, prs, syms, "squeezing pairs");

  std::vector<SystemState> starts;
  std::vector<TorusPoint> start_syms;
  for (std::size_t i = 0; i < prs.size(); ++i) {
    starts.push_back(prs[i].first);
    starts.push_back(prs[i].second);
    start_syms.push_back(syms[i]);
    start_syms.push_back(syms[i]);
  }
  const double entry = absorbing_entry_time(start_syms, starts, e.absorbing_horizon, ctx.cfg.integrator, ctx.p,
                                            ctx.c, ctx.cfg.tolerances);
  const double t2 = entry + e.t2_offset;

  SqueezeSearchRanges ranges;
  ranges.t2 = t2;
  ranges.T_span = e.squeeze_T_span;
  ranges.T_step = e.squeeze_T_step;
  ranges.max_log2_N3 = e.squeeze_max_log2_N3;
  const SqueezePair sp = find_squeezing_pair(ctx.p, ctx.c, ranges);

  CsvTable t{{"T_star", "N_star", "beta_pred", "beta_meas"}, {}};
  json results = {{"entry_time", entry}, {"t2", t2}, {"found", sp.found}, {"best_beta_sq", sp.best_beta_sq}};
  const double T_star = sp.found ? sp.T_star : t2;
  if (sp.found) {
    const SqueezeReport rep = squeezing_test(syms, prs, sp.T_star, sp.N_star, t2, ctx.cfg.integrator, ctx.p, ctx.c);
    t.rows.push_back({rep.T_star, static_cast<double>(rep.N_star), rep.beta_predicted, rep.beta_measured});
    results["T_star"] = rep.T_star;
    results["N_star"] = rep.N_star;
    results["N3"] = sp.N3;
    results["beta_pred"] = rep.beta_predicted;
    results["beta_meas"] = rep.beta_measured;
    results["passed"] = rep.passed;
    results["lipschitz_measured"] = rep.lipschitz_measured;
    results["lipschitz_bound"] = rep.lipschitz_bound;
    if (!rep.passed) ctx.fail("measured high-mode contraction exceeded the predicted beta");
  } else {
    ctx.fail("no (T*, N*) with beta^2 < 1/4 in the search range; minimum beta^2 = " +
             format_number(sp.best_beta_sq));
  }
  // Projection covering the whole window: the high-mode part vanishes identically.
  const long long N_full = static_cast<long long>(ctx.window()) + 1;
  const SqueezeReport full = squeezing_test(syms, prs, T_star, N_full, t2, ctx.cfg.integrator, ctx.p, ctx.c);
  t.rows.push_back({full.T_star, static_cast<double>(N_full), full.beta_predicted, full.beta_measured});
  results["beta_meas_full_window"] = full.beta_measured;
  ctx.emit(t, "squeezing.csv");
  ctx.man.results = results;
}

struct Sections {
  UniformAttractorSample D;
  double entry = 0.0;
  double T = 0.0;
  std::vector<double> s_grid;
};

Sections build_sections(Context& ctx) {
  const ExperimentSettings& e = ctx.cfg.experiment;
  const auto b0 = ctx.ball(kBallSamples, e.attractor_samples, ctx.c.R, "attractor B0 samples");
  const auto syms = ctx.symbols(kAttractorSymbols, e.attractor_symbols, "attractor symbols");

  std::vector<SystemState> starts;
  std::vector<TorusPoint> start_syms;
  for (const auto& s : syms) {
    for (const auto& phi : b0) {
      starts.push_back(phi);
      start_syms.push_back(s);
    }
  }
  Sections sec;
  sec.entry = absorbing_entry_time(start_syms, starts, e.absorbing_horizon, ctx.cfg.integrator, ctx.p, ctx.c,
                                   ctx.cfg.tolerances);
  sec.T = snap_time(sec.entry + 2.0 / ctx.c.theta1, ctx.cfg.integrator.h);
  for (int q = 0; q < e.section_depths; ++q) sec.s_grid.push_back(sec.T + q * e.section_depth_step);
  sec.D = approximate_uniform_attractor(syms, b0, e.burn_in, ctx.cfg.integrator, ctx.p);
  if (!sec.D.stationary) {
    ctx.fail("uniform attractor sample not stationary; burn-in too short (shift " +
             format_number(sec.D.stationarity_shift) + ", resolution " + format_number(sec.D.resolution) + ")");
  }
  return sec;
}

SetFamilySample family_on_grid(Context& ctx, const Sections& sec, int per_axis) {
  return build_pullback_family(torus_grid(ctx.kappa(), static_cast<std::size_t>(per_axis)), sec.D.cloud, sec.T,
                               sec.s_grid, Provenance::pullback_A_eps, ctx.cfg.integrator, ctx.p);
}

json sections_json(const Sections& sec, const SetFamilySample& fam) {
  return {{"entry_time", sec.entry},
          {"T", sec.T},
          {"s_grid", sec.s_grid},
          {"provenance", std::string(to_string(fam.provenance))},
          {"D_points", sec.D.cloud.size()},
          {"D_stationarity_shift", sec.D.stationarity_shift},
          {"D_resolution", sec.D.resolution},
          {"D_stationary", sec.D.stationary}};
}

void run_pullback(Context& ctx) {
  const ExperimentSettings& e = ctx.cfg.experiment;
  const Sections sec = build_sections(ctx);
  CsvTable t{{"t", "defect", "resolution", "n_symbols"}, {}};
  json grids = json::array();
  std::vector<double> coarse_defects;
  bool within = true, not_worse = true;
  for (int per_axis : {e.symbol_grid / 2, e.symbol_grid}) {
    const SetFamilySample fam = family_on_grid(ctx, sec, per_axis);
    const double res = fam.resolution();
    json g = {{"per_axis", per_axis}, {"resolution", res}, {"defects", json::array()}};
    for (std::size_t i = 0; i < e.invariance_times.size(); ++i) {
      const double d = forward_invariance_defect(fam, e.invariance_times[i], ctx.cfg.integrator, ctx.p);
      t.rows.push_back({snap_time(e.invariance_times[i], ctx.cfg.integrator.h), d, res,
                        static_cast<double>(fam.entries.size())});
      g["defects"].push_back(d);
      within = within && d <= 2.0 * res;
      if (per_axis == e.symbol_grid / 2) {
        coarse_defects.push_back(d);
      } else {
        not_worse = not_worse && d <= coarse_defects[i];
      }
    }
    grids.push_back(g);
    if (per_axis == e.symbol_grid) ctx.man.results = sections_json(sec, fam);
  }
  ctx.emit(t, "pullback.csv");
  ctx.man.results["grids"] = grids;
  ctx.man.results["defect_within_2_resolution"] = within;
  ctx.man.results["finer_grid_not_worse"] = not_worse;
  if (!within) ctx.fail("forward-invariance defect above twice the cloud resolution");
  if (!not_worse) ctx.fail("finer symbol grid increased the forward-invariance defect");
}

struct CurveRun {
  AttractionCurve curve;
  double entry = 0.0;
  json info;
};

CurveRun attraction(Context& ctx) {
  const ExperimentSettings& e = ctx.cfg.experiment;
  const Sections sec = build_sections(ctx);
  const SetFamilySample fam = family_on_grid(ctx, sec, e.symbol_grid);
  const auto B = ctx.ball(kForwardSet, e.forward_samples, e.forward_radius, "forward set B");
  const auto syms = ctx.symbols(kForwardSymbols, e.forward_symbols, "forward symbols");

  std::vector<double> grid;
  const auto n = static_cast<long long>(std::floor(e.forward_horizon / e.forward_dt + 1e-9));
  for (long long i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) * e.forward_dt);

  CurveRun run;
  run.curve = forward_attraction_curve(PointCloud{B}, fam, grid, syms, ctx.cfg.integrator, ctx.p);
  std::vector<SystemState> starts;
  std::vector<TorusPoint> start_syms;
  for (const auto& s : syms) {
    for (const auto& b : B) {
      starts.push_back(b);
      start_syms.push_back(s);
    }
  }
  run.entry = absorbing_entry_time(start_syms, starts, e.forward_horizon, ctx.cfg.integrator, ctx.p, ctx.c,
                                   ctx.cfg.tolerances);
  run.info = sections_json(sec, fam);
  run.info["B_entry_time"] = run.entry;
  run.info["resolution"] = run.curve.resolution;
  return run;
}

void run_forward(Context& ctx) {
  const CurveRun run = attraction(ctx);
  const AttractionCurve& cv = run.curve;
  CsvTable t{{"t", "sup_dH", "resolution"}, {}};
  for (std::size_t i = 0; i < cv.times.size(); ++i) t.rows.push_back({cv.times[i], cv.values[i], cv.resolution});
  ctx.emit(t, "forward.csv");

  const double initial = cv.values.front();
  const double final_value = cv.values.back();
  const bool decayed = final_value < std::max(initial / 10.0, 3.0 * cv.resolution);
  bool monotone = true;
  double running_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cv.times.size(); ++i) {
    if (cv.times[i] < run.entry) continue;
    monotone = monotone && cv.values[i] <= running_min + 2.0 * cv.resolution;
    running_min = std::min(running_min, cv.values[i]);
  }
  ctx.man.results = run.info;
  ctx.man.results["initial"] = initial;
  ctx.man.results["final"] = final_value;
  ctx.man.results["decayed"] = decayed;
  ctx.man.results["monotone_after_entry"] = monotone;
  if (!decayed) ctx.fail("attraction curve did not decay by a factor 10 or to the noise floor");
  if (!monotone) ctx.fail("attraction curve increased by more than twice the resolution after entry");
}

void run_rates(Context& ctx) {
  const CurveRun run = attraction(ctx);
  const AttractionCurve& cv = run.curve;
  CsvTable t{{"t", "dH"}, {}};
  for (std::size_t i = 0; i < cv.times.size(); ++i) t.rows.push_back({cv.times[i], cv.values[i]});
  ctx.emit(t, "rates.csv");

  CsvTable fit_table{{"C", "alpha", "t_min", "t_max", "residual", "n_points"}, {}};
  ctx.man.results = run.info;
  ctx.man.results["noise_floor"] = 3.0 * cv.resolution;
  ctx.man.results["theta1_half"] = 0.5 * ctx.c.theta1;
  try {
    const RateFit fit = fit_exponential_rate(cv.times, cv.values, 3.0 * cv.resolution);
    fit_table.rows.push_back(
        {fit.C, fit.alpha, fit.t_min, fit.t_max, fit.residual, static_cast<double>(fit.n_points)});
    ctx.man.results["alpha"] = fit.alpha;
    ctx.man.results["C"] = fit.C;
    ctx.man.results["residual"] = fit.residual;
    ctx.man.results["n_points"] = fit.n_points;
    if (!(fit.alpha > 0.0)) ctx.fail("fitted rate is not positive");
  } catch (const InsufficientData& err) {
    ctx.fail(err.what());
  }
  ctx.emit(fit_table, "rates_fit.csv");
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"constants", "absorbing", "tails",   "lipschitz",
                                                 "squeezing", "pullback",  "forward", "rates"};
  return names;
}

json RunManifest::to_json() const {
  return {{"scenario", scenario},
          {"tool_version", std::string(kToolVersion)},
          {"schema_version", std::string(kSchemaVersion)},
          {"config_hash", config_hash},
          {"seed", seed},
          {"constants", constants_json(constants)},
          {"outputs", outputs},
          {"wall_clock_seconds", wall_clock_seconds},
          {"richardson_estimate", richardson_estimate},
          {"defaults_applied", defaults_applied},
          {"substreams", substreams},
          {"failures", failures},
          {"results", results}};
}

RunManifest run_scenario(const ExperimentConfig& config, std::string_view name, const std::filesystem::path& out_dir) {
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown scenario '" + std::string(name) + "' (valid: " + valid + ")");
  }
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  RunManifest man;
  man.scenario = std::string(name);
  man.config_hash = config_hash(config);
  man.seed = config.experiment.seed;
  man.constants = derive_constants(config.params);
  man.defaults_applied = config.defaults_applied;

  Context ctx{config, config.params, man.constants, SeedTree(config.experiment.seed), out_dir, man};

  {
    auto rng = ctx.tree.stream(kRichardson, 0);
    const SystemState phi = random_state_in_ball(ctx.window(), ctx.c.R, rng);
    const TorusPoint sigma = random_torus_point(ctx.kappa(), rng);
    man.richardson_estimate = richardson_error_estimate(sigma, phi, 1.0, config.integrator, config.params);
    ctx.record_streams("Richardson probe", kRichardson, 0, 1);
  }

  try {
    if (name == "constants") run_constants(ctx);
    if (name == "absorbing") run_absorbing(ctx);
    if (name == "tails") run_tails(ctx);
    if (name == "lipschitz") run_lipschitz(ctx);
    if (name == "squeezing") run_squeezing(ctx);
    if (name == "pullback") run_pullback(ctx);
    if (name == "forward") run_forward(ctx);
    if (name == "rates") run_rates(ctx);
  } catch (const DivergenceError& e) {
    ctx.fail(e.what());
  } catch (const CoverageError& e) {
    ctx.fail(e.what());
  } catch (const InsufficientData& e) {
    ctx.fail(e.what());
  }

  man.results["richardson_below_energy_tol"] = man.richardson_estimate < config.tolerances.energy_abs;
  man.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string manifest_name = man.scenario + "_manifest.json";
  man.outputs.push_back(manifest_name);
  const auto path = out_dir / manifest_name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << man.to_json().dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
  return man;
}

}  // namespace lattice
