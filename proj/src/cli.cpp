#include "kramers/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "kramers/config.hpp"
#include "kramers/errors.hpp"
#include "kramers/verification.hpp"

namespace kramers {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string command;
  std::string config_path;
  std::optional<double> epsilon;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  bool dump_trajectories = false;
  std::optional<std::string> out;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json point_json(const CriticalPoint& c) {
  return {{"location", vec(c.location)},
          {"kind", to_string(c.kind)},
          {"energy", c.energy},
          {"hessian_eigenvalues", vec(c.hessian_eigenvalues)}};
}

json stats_json(const HittingStats& s) {
  return {{"n_completed", s.n_completed}, {"n_timeout", s.n_timeout},
          {"mean", s.mean},               {"variance", s.variance},
          {"ci95_half_width", s.ci95_half_width},
          {"min", s.min},                 {"max", s.max},
          {"base_seed", s.base_seed},     {"stream_begin", s.stream_begin},
          {"stream_end", s.stream_end}};
}

// One pipeline run: resolved config, model and the report envelope.
class Pipeline {
 public:
  Pipeline(const Options& o, RunConfig cfg, std::ostream& out)
      : opt_(o), cfg_(std::move(cfg)), out_(out), model_(build_model(cfg_.potential)) {
    meta_["created_utc"] = utc_now();
  }

  int run() {
    fs::create_directories(cfg_.output);
    if (opt_.command == "analyze") return analyze();
    if (opt_.command == "predict") return predict();
    if (opt_.command == "simulate") return simulate();
    if (opt_.command == "capacity") return capacity();
    return verify();
  }

 private:
  const ModelContext& context() {
    if (!ctx_)
      ctx_ = analyze_model(model_, cfg_.gamma, cfg_.landscape.search_half_width,
                           cfg_.landscape.grid_density);
    return *ctx_;
  }

  json envelope(const json& result) const {
    json j;
    j["tool"] = "kramers";
    j["version"] = kToolVersion;
    j["command"] = opt_.command;
    j["config_hash"] = config_hash(cfg_);
    j["seed"] = cfg_.ensemble.base_seed;
    j["config"] = json::parse(canonical_json(cfg_));
    j["result"] = result;
    j["metadata"] = meta_;
    return j;
  }

  std::string csv_header() const {
    return "# kramers " + std::string(kToolVersion) + " config_hash=" + config_hash(cfg_) +
           " seed=" + std::to_string(cfg_.ensemble.base_seed) + "\n";
  }

  void write(const std::string& name, const std::string& text) {
    const fs::path p = fs::path(cfg_.output) / name;
    std::ofstream f(p);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
    out_ << "wrote " << p.string() << "\n";
  }

  void write_json(const std::string& name, const json& result) {
    write(name, envelope(result).dump(2) + "\n");
  }

  int analyze() {
    const auto points =
        find_critical_points(model_, SearchBox::cube(model_.dimension(), cfg_.landscape.search_half_width),
                             cfg_.landscape.grid_density);
    json r;
    r["critical_points"] = json::array();
    for (const auto& c : points) r["critical_points"].push_back(point_json(c));
    const auto& ctx = context();
    const auto& rep = ctx.report;
    r["m"] = point_json(rep.m);
    r["s"] = point_json(rep.s);
    r["saddle"] = point_json(rep.saddle);
    r["barrier_from_m"] = rep.barrier_from_m;
    r["barrier_from_s"] = rep.barrier_from_s;
    r["lambda_sigma"] = rep.lambda_sigma;
    r["is_valid_double_well"] = rep.is_valid_double_well;
    r["counts"] = {{"minima", rep.n_minima}, {"saddles", rep.n_saddles}, {"other", rep.n_other}};
    r["frame"] = {{"mu", ctx.frame.mu}, {"u", vec(ctx.frame.u)}, {"v", vec(ctx.frame.v)}};
    const auto g = check_growth_conditions(model_, 0.75, default_growth_radii());
    r["growth"] = {{"beta", g.beta}, {"min_ratio_1", g.min_ratio_1},
                   {"min_ratio_2", g.min_ratio_2}, {"pass", g.pass}};
    write_json("landscape.json", r);
    return kExitOk;
  }

  int predict() {
    const auto& ctx = context();
    std::ostringstream csv;
    csv << std::setprecision(10) << csv_header();
    csv << "epsilon,gamma,regime,prefactor,exponent,predicted_mean_time\n";
    for (double eps : cfg_.epsilons) {
      for (Regime reg : {Regime::underdamped, Regime::overdamped}) {
        const auto p = ek_prediction(ctx.report, ctx.frame, eps, reg);
        csv << eps << "," << cfg_.gamma << "," << to_string(reg) << "," << p.prefactor << ","
            << p.exponent << "," << p.predicted_mean_time << "\n";
      }
    }
    write("predictions.csv", csv.str());
    return kExitOk;
  }

  int simulate() {
    const auto& ctx = context();
    json r;
    r["runs"] = json::array();
    json wall = json::array();
    std::vector<std::pair<double, HittingStats>> series;
    std::ostringstream traj;
    traj << std::setprecision(10) << csv_header() << "epsilon,trajectory_id,hitting_time,stop_reason\n";
    for (double eps : cfg_.epsilons) {
      const auto ek = ek_prediction(ctx.report, ctx.frame, eps, Regime::underdamped);
      EnsembleConfig c;
      c.epsilon = eps;
      c.gamma = cfg_.gamma;
      c.n_traj = cfg_.ensemble.n_traj;
      c.start = PhaseState::at_rest(ctx.report.m.location);
      c.target = Ball::around(ctx.report.s.location, cfg_.target_radius(eps));
      c.base_seed = cfg_.ensemble.base_seed;
      c.integrator.scheme = cfg_.integrator.scheme;
      c.integrator.dt = cfg_.integrator.dt;
      if (cfg_.integrator.auto_dt)
        c.integrator.dt = select_time_step(model_, cfg_.gamma, c.start, c.integrator.scheme,
                                           c.integrator.dt, 10.0, 1e-6);
      c.integrator.max_time = cfg_.integrator.max_time_factor * ek.predicted_mean_time;
      std::vector<TrajectoryRecord> records;
      RunOptions ro;
      ro.jobs = opt_.jobs;
      if (opt_.dump_trajectories) ro.records = &records;
      const auto st = estimate_mean_hitting_time(c, model_, ro);
      series.push_back({eps, st});
      json run = {{"epsilon", eps},
                  {"target_radius", c.target.radius},
                  {"dt", c.integrator.dt},
                  {"max_time", c.integrator.max_time},
                  {"stats", stats_json(st)},
                  {"predicted_mean_time", ek.predicted_mean_time},
                  {"ratio_to_prediction", st.mean / ek.predicted_mean_time}};
      r["runs"].push_back(run);
      wall.push_back({{"epsilon", eps}, {"wall_time_seconds", st.wall_time}});
      for (const auto& rec : records)
        traj << eps << "," << rec.id << "," << rec.time << "," << to_string(rec.reason) << "\n";
    }
    if (series.size() >= 3) {
      const auto fit = barrier_slope_fit(series);
      r["arrhenius_fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept},
                            {"r_squared", fit.r_squared}, {"barrier", ctx.report.barrier_from_m}};
    }
    meta_["wall_time"] = wall;
    meta_["jobs"] = opt_.jobs;
    write_json("hitting.json", r);
    if (opt_.dump_trajectories) write("trajectories.csv", traj.str());
    return kExitOk;
  }

  int capacity() {
    const auto& ctx = context();
    const auto quad = cfg_.quadrature_options();
    const double K = cfg_.quadrature.K;
    json r;
    r["K"] = K;
    r["points"] = json::array();
    for (double eps : cfg_.epsilons) {
      const auto Z = partition_function(model_, ctx.report, eps,
                                        default_truncation_energy(ctx.report, eps), quad);
      const auto cap = boundary_capacity_integral(model_, ctx.report, ctx.frame, eps, K, quad,
                                                  EnergyMode::exact, Z.Z_eps);
      const auto num = numerator_integral(model_, ctx.report, eps, quad, 0.0, EnergyMode::exact,
                                          Z.Z_eps);
      const auto ek = ek_prediction(ctx.report, ctx.frame, eps, Regime::underdamped);
      const auto tr = predicted_time_ratio(num, cap, ek);
      r["points"].push_back(
          {{"epsilon", eps},
           {"partition", {{"Z_eps", Z.Z_eps}, {"laplace", Z.laplace_approx}, {"ratio", Z.ratio}}},
           {"boundary",
            {{"integral", cap.boundary_integral},
             {"alpha_epsilon", cap.alpha_epsilon},
             {"ratio", cap.ratio},
             {"minus_side_integral", cap.minus_side_integral},
             {"minus_ratio", cap.minus_ratio}}},
           {"numerator",
            {{"margin", num.margin},
             {"value", num.value},
             {"laplace_formula", num.laplace_formula},
             {"ratio", num.ratio}}},
           {"mean_time_estimate", tr.mean_time_estimate},
           {"predicted_mean_time", ek.predicted_mean_time},
           {"ek_cross_check_ratio", tr.ek_cross_check_ratio}});
    }
    write_json("capacity.json", r);
    return kExitOk;
  }

  int verify() {
    const auto& ctx = context();
    const auto quad = cfg_.quadrature_options();
    std::vector<CheckResult> checks;
    checks.push_back(run_check("derivatives", [&](std::ostream& o) {
      return derivative_check({model_}, 50, cfg_.landscape.search_half_width, o);
    }));
    checks.push_back(run_check("frame_identities", [&](std::ostream& o) {
      return frame_identity_check(ctx.frame, 1e-12, 1e-10, 1e-10, 1e-9, o);
    }));
    checks.push_back(run_check("prefactor_ratio", [&](std::ostream& o) {
      return prefactor_ratio_check(ctx.report, ctx.frame, 1e-12, o);
    }));
    for (double eps : cfg_.epsilons) {
      std::ostringstream nm;
      nm << "harmonicity eps=" << eps;
      checks.push_back(run_check(nm.str(), [&](std::ostream& o) {
        HarmonicitySettings s;
        s.epsilon = eps;
        s.K = cfg_.quadrature.K;
        return harmonicity_check(ctx, s, o);
      }));
    }
    checks.push_back(run_check("lyapunov", [&](std::ostream& o) {
      LyapunovSettings s;
      s.n_samples = cfg_.verify.samples;
      return lyapunov_check(ctx, s, o);
    }));
    checks.push_back(run_check("zero_noise_flow", [&](std::ostream& o) {
      return zero_noise_flow_check(ctx, {}, o);
    }));
    checks.push_back(run_check("tightness", [&](std::ostream& o) {
      return tightness_check(ctx, {0.1, 0.3}, {0.1, 0.05, 0.02}, 1e-12, quad, o);
    }));
    checks.push_back(run_check("linearization_covariance", [&](std::ostream& o) {
      const Vector z = ctx.report.m.location;
      const int d = model_.dimension();
      Matrix JJt = Matrix::Zero(2 * d, 2 * d);
      JJt.bottomRightCorner(d, d).setIdentity();
      const Matrix expected = stationary_covariance(linearization_drift(model_, cfg_.gamma, z), JJt);
      return covariance_check(model_, cfg_.gamma, z, expected, 1e-8, o);
    }));
    checks.push_back(run_check("harmonic_capacity_control", [&](std::ostream& o) {
      return harmonic_control_check(ctx, 0.02, cfg_.quadrature.K, 1e-2, quad, o);
    }));
    if (cfg_.verify.monte_carlo) {
      checks.push_back(run_check("monte_carlo_hitting", [&](std::ostream& o) {
        HittingSettings s;
        s.epsilons = cfg_.epsilons;
        s.band_epsilons = cfg_.epsilons;
        s.n_traj = cfg_.ensemble.n_traj;
        s.radius = cfg_.target_radius(cfg_.epsilons.front());
        s.dt = cfg_.integrator.dt;
        s.seed = cfg_.ensemble.base_seed;
        s.jobs = opt_.jobs;
        // a slope needs three temperatures
        if (s.epsilons.size() < 3) s.slope_rel_tol = 1e300;
        return hitting_time_check(ctx, s, o);
      }));
    }
    json r;
    r["checks"] = json::array();
    json timing = json::array();
    bool all = true;
    for (const auto& c : checks) {
      r["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
      timing.push_back({{"name", c.name}, {"seconds", c.seconds}});
      out_ << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
      all = all && c.passed;
    }
    r["all_passed"] = all;
    meta_["timing"] = timing;
    write_json("verify.json", r);
    return all ? kExitOk : kExitPipeline;
  }

  Options opt_;
  RunConfig cfg_;
  std::ostream& out_;
  PotentialModel model_;
  std::optional<ModelContext> ctx_;
  json meta_;
};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Eyring-Kramers asymptotics and Monte Carlo checks for underdamped Langevin dynamics",
               args.empty() ? "kramers" : args[0]};
  app.require_subcommand(1);
  Options o;
  const std::pair<const char*, const char*> commands[] = {
      {"analyze", "critical points, barriers and saddle frame -> landscape.json"},
      {"predict", "Eyring-Kramers prefactors and mean times -> predictions.csv"},
      {"simulate", "Monte Carlo mean hitting times -> hitting.json, trajectories.csv"},
      {"capacity", "capacity and numerator quadrature -> capacity.json"},
      {"verify", "invariant checks -> verify.json, exit 0 iff all pass"}};
  for (const auto& [name, help] : commands) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("config", o.config_path, "JSON run configuration")->required();
    sc->add_option("--epsilon", o.epsilon, "single temperature, replaces the config grid");
    sc->add_option("--jobs", o.jobs, "worker threads")->check(CLI::Range(1, 4096));
    sc->add_option("--seed", o.seed, "base seed, replaces ensemble.base_seed");
    sc->add_option("--set", o.sets, "dotted override, e.g. ensemble.n_traj=4000");
    sc->add_flag("--dump-trajectories", o.dump_trajectories, "write trajectories.csv");
    sc->add_option("--out", o.out, "output directory");
    sc->callback([&o, n = std::string(name)] { o.command = n; });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  RunConfig cfg;
  try {
    cfg = load_config(o.config_path, o.sets);
    if (o.epsilon) {
      if (!(*o.epsilon > 0.0 && *o.epsilon < 1.0))
        throw ConfigError("field '--epsilon': must lie in (0, 1)");
      cfg.epsilons = {*o.epsilon};
    }
    if (o.seed) cfg.ensemble.base_seed = *o.seed;
    if (o.out) cfg.output = *o.out;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    return Pipeline(o, std::move(cfg), out).run();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << o.command << " failed: " << e.what() << "\n";
    return kExitPipeline;
  }
}

int run_command(const std::vector<std::string>& args) {
  return run_command(args, std::cout, std::cerr);
}

}  // namespace kramers
