#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "respdens/asymptotics.hpp"
#include "respdens/checks.hpp"
#include "respdens/density.hpp"
#include "respdens/efficiency.hpp"
#include "respdens/error.hpp"
#include "respdens/parallel.hpp"
#include "respdens/rates.hpp"
#include "respdens/rng.hpp"
#include "respdens/report_io.hpp"
#include "respdens/scenario.hpp"
#include "respdens/truth.hpp"

namespace respdens::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// Config access

template<class T>
std::optional<T> get_opt(const Json& cfg, const std::string& key)
{
  if (!cfg.contains(key) || cfg.at(key).is_null())
    return std::nullopt;
  try {
    return cfg.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError("config field '" + key + "' has the wrong type: " + e.what());
  }
}

std::string flag_name(std::string key)
{
  for (auto& ch : key) {
    if (ch == '_')
      ch = '-';
  }
  return "--" + key;
}

template<class T>
T get_req(const Json& cfg, const std::string& key, const std::string& command)
{
  if (auto v = get_opt<T>(cfg, key))
    return *v;
  throw ConfigError(command + " requires '" + key + "' (config field or " + flag_name(key) + ")");
}

std::uint64_t get_seed(const Json& cfg, const std::string& command)
{
  if (!cfg.contains("seed") || cfg.at("seed").is_null())
    throw ConfigError(command + " requires an explicit seed (--seed or config field 'seed')");
  if (!cfg.at("seed").is_number_unsigned())
    throw ConfigError("seed must be a nonnegative integer");
  return cfg.at("seed").get<std::uint64_t>();
}

std::size_t get_positive(const Json& cfg, const std::string& key, const std::string& command,
                         std::optional<std::size_t> fallback = std::nullopt)
{
  std::optional<long long> v = get_opt<long long>(cfg, key);
  if (!v) {
    if (fallback)
      return *fallback;
    throw ConfigError(command + " requires '" + key + "' (config field or " + flag_name(key) + ")");
  }
  if (*v < 1)
    throw ConfigError("'" + key + "' must be >= 1, got " + std::to_string(*v));
  return static_cast<std::size_t>(*v);
}

std::vector<std::size_t> get_n_list(const Json& cfg, const std::string& command)
{
  const auto raw = get_req<std::vector<long long>>(cfg, "n_list", command);
  if (raw.empty())
    throw ConfigError("n_list is empty");
  std::vector<std::size_t> ns;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 1)
      throw ConfigError("n_list entries must be positive");
    if (i > 0 && raw[i] <= raw[i - 1])
      throw ConfigError("n_list must be strictly increasing");
    ns.push_back(static_cast<std::size_t>(raw[i]));
  }
  return ns;
}

BandwidthSchedule get_schedule(const Json& cfg, const char* key, BandwidthRule rule)
{
  BandwidthSchedule s{rule, 1.0, std::nullopt};
  if (cfg.contains("bandwidth") && cfg.at("bandwidth").contains(key)) {
    const Json& b = cfg.at("bandwidth").at(key);
    if (auto c = get_opt<double>(b, "constant"))
      s.constant = *c;
    if (auto e = get_opt<double>(b, "exponent"))
      s.exponent_override = *e;
  }
  if (!(s.constant > 0.0))
    throw ConfigError(std::string("bandwidth constant for '") + key + "' must be positive");
  (void)s.exponent(); // validates an override
  return s;
}

PipelineConfig get_pipeline(const Json& cfg)
{
  PipelineConfig p;
  p.convolution = get_schedule(cfg, "convolution", BandwidthRule::Convolution);
  p.smoother = get_schedule(cfg, "smoother", BandwidthRule::Smoother);
  if (auto path = get_opt<std::string>(cfg, "path"))
    p.path = estimator_path_from_string(*path);
  p.fft_size = get_positive(cfg, "fft_size", "", kDefaultFftSize);
  p.grid_points = get_positive(cfg, "grid_points", "", 1024);
  p.clamp = get_opt<bool>(cfg, "clamp").value_or(false);
  return p;
}

EfficiencyConfig get_efficiency(const Json& cfg)
{
  EfficiencyConfig e;
  e.score = get_schedule(cfg, "score", BandwidthRule::Score);
  e.smoother = get_schedule(cfg, "smoother", BandwidthRule::Smoother);
  if (auto s = get_opt<std::uint64_t>(cfg, "shuffle_seed"))
    e.shuffle_seed = *s;
  if (auto t = get_opt<long long>(cfg, "table_points")) {
    if (*t < 0)
      throw ConfigError("table_points must be >= 0");
    e.table_points = static_cast<std::size_t>(*t);
  }
  return e;
}

std::size_t get_workers(const Json& cfg)
{
  return get_positive(cfg, "workers", "", default_workers(1));
}

// ---------------------------------------------------------------------------
// Output directory and manifest

class Artifacts
{
public:
  Artifacts(const Json& cfg, std::string command)
    : command_(std::move(command)), start_(Clock::now())
  {
    dir_ = get_opt<std::string>(cfg, "out").value_or("respdens-out");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_))
      throw ConfigError("cannot create output directory '" + dir_.string() + "'");
    const fs::path probe = dir_ / ".respdens-write-probe";
    {
      std::ofstream o(probe);
      if (!o)
        throw ConfigError("output directory '" + dir_.string() + "' is not writable");
    }
    fs::remove(probe, ec);
    snapshot_ = cfg;
    snapshot_["command"] = command_;
    // artifacts must not depend on where they are written or how many
    // workers produced them
    stable_ = snapshot_;
    for (const char* k : {"out", "workers", "config"})
      stable_.erase(k);
  }

  const Json& stable_config() const { return stable_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  void csv(const std::string& name, std::span<const io::Column> cols)
  {
    io::write_csv(path(name), cols);
    files_.push_back(name);
  }
  void json(const std::string& name, const Json& doc)
  {
    io::write_json(path(name), doc);
    files_.push_back(name);
  }
  void added(const std::string& name) { files_.push_back(name); }

  fs::path finish()
  {
    const double secs = std::chrono::duration<double>(Clock::now() - start_).count();
    io::write_manifest(dir_, snapshot_, files_, secs);
    return dir_ / io::kManifestName;
  }

private:
  std::string command_;
  Clock::time_point start_;
  fs::path dir_;
  Json snapshot_;
  Json stable_;
  std::vector<std::string> files_;
};

// ---------------------------------------------------------------------------
// Commands

Dataset load_dataset_csv(const std::string& path)
{
  const auto table = io::read_csv(path);
  if (!table.has("x") || !table.has("y"))
    throw ConfigError("dataset '" + path + "' needs columns x and y");
  Dataset d;
  d.x = table.column("x");
  d.y = table.column("y");
  d.scenario = "file:" + fs::path(path).filename().string();
  if (table.has("eps") && table.has("r_x"))
    d.hidden = HiddenTruth{table.column("eps"), table.column("r_x")};
  for (double v : d.x) {
    if (!(v >= 0.0 && v <= 1.0))
      throw ConfigError("dataset '" + path + "': covariates must lie in [0, 1]");
  }
  return d;
}

int cmd_simulate(const Json& cfg, std::ostream& out)
{
  const std::string cmd = "simulate";
  const Scenario s = load_scenario(get_req<std::string>(cfg, "scenario", cmd));
  const std::size_t n = get_positive(cfg, "n", cmd);
  const std::uint64_t seed = get_seed(cfg, cmd);
  const bool oracle = get_opt<bool>(cfg, "oracle").value_or(false);
  Artifacts art(cfg, cmd);
  const Dataset d = sample(s, n, seed);
  std::vector<io::Column> cols{{"x", d.x}, {"y", d.y}};
  if (oracle) {
    cols.push_back({"eps", d.hidden->errors});
    cols.push_back({"r_x", d.hidden->regression_values});
  }
  art.csv("dataset.csv", cols);
  art.json("dataset.json", {{"config", art.stable_config()},
                            {"scenario", s.to_json()},
                            {"n", n},
                            {"seed", seed},
                            {"oracle_columns", oracle},
                            {"validation", validate(s).to_json()}});
  art.finish();
  out << "simulate: " << n << " rows from " << s.name << " written to "
      << art.path("dataset.csv").string() << "\n";
  return 0;
}

int cmd_estimate(const Json& cfg, std::ostream& out)
{
  const std::string cmd = "estimate";
  Dataset data;
  std::optional<Scenario> scenario;
  if (auto file = get_opt<std::string>(cfg, "data")) {
    data = load_dataset_csv(*file);
  } else {
    scenario = load_scenario(get_req<std::string>(cfg, "scenario", cmd));
    data = sample(*scenario, get_positive(cfg, "n", cmd), get_seed(cfg, cmd));
  }
  const PipelineConfig pipeline = get_pipeline(cfg);
  Artifacts art(cfg, cmd);
  const auto res = estimate_pipeline(data, pipeline);

  Json meta = {{"config", art.stable_config()},
               {"n", data.size()},
               {"path", to_string(pipeline.path)},
               {"smoother_bandwidth", res.smoother.bandwidth},
               {"convolution_bandwidth", res.h_hat.bandwidth},
               {"pseudo_inverse_fits", res.smoother.pseudo_inverse_count()},
               {"h_hat_integral", res.h_hat.integral()},
               {"h_hat_max", res.h_hat.max_value()},
               {"f_hat_integral", res.f_hat.integral()},
               {"q_hat_integral", res.q_hat.integral()}};

  if (get_opt<bool>(cfg, "compare_paths").value_or(false)) {
    PipelineConfig other = pipeline;
    other.path = pipeline.path == EstimatorPath::Fft ? EstimatorPath::Direct : EstimatorPath::Fft;
    other.grid = res.h_hat.grid;
    const auto alt = convolution_estimate(res.smoother.residuals, res.smoother.r_hat,
                                          other.kernels, res.h_hat.bandwidth, res.h_hat.grid,
                                          other.path, other.fft_size);
    const double diff = sup_distance(res.h_hat.values, alt.values);
    meta["path_check"] = {{"other_path", to_string(other.path)},
                          {"sup_difference", diff},
                          {"relative_to_max", diff / res.h_hat.max_value()}};
    out << "estimate: sup |" << to_string(pipeline.path) << " - " << to_string(other.path)
        << "| = " << diff << "\n";
  }

  res.smoother.write_csv(art.path("smoother.csv").string(),
                         scenario ? scenario->regression.get() : nullptr);
  art.added("smoother.csv");
  res.f_hat.write_csv(art.path("f_hat.csv").string());
  art.added("f_hat.csv");
  res.q_hat.write_csv(art.path("q_hat.csv").string());
  art.added("q_hat.csv");
  res.h_hat.write_csv(art.path("h_hat.csv").string());
  art.added("h_hat.csv");

  if (get_opt<bool>(cfg, "efficient").value_or(false)) {
    const auto eff = efficiency_correction(data, res.h_hat.grid, get_efficiency(cfg));
    const auto corrected = efficient_estimate(res.h_hat, eff.term);
    double sup_C = 0.0;
    for (double c : eff.term.C)
      sup_C = std::max(sup_C, std::abs(c));
    const double scaled = std::sqrt(static_cast<double>(data.size())) * sup_C;
    const auto jb = jarque_bera(res.smoother.residuals);
    eff.term.write_csv(art.path("correction.csv").string());
    art.added("correction.csv");
    art.json("correction.json", eff.term.sidecar());
    corrected.write_csv(art.path("h_efficient.csv").string());
    art.added("h_efficient.csv");
    meta["efficiency"] = {{"fisher_information_hat", eff.term.J},
                          {"sqrt_n_sup_C", scaled},
                          {"h_efficient_integral", corrected.integral()},
                          {"normality", {{"test", "jarque-bera"},
                                         {"statistic", jb.statistic},
                                         {"p_value", jb.p_value},
                                         {"near_normal", jb.near_normal}}}};
    out << "estimate: J-hat = " << eff.term.J << ", sqrt(n) sup|C-hat| = " << scaled
        << (jb.near_normal ? " [near-normal]" : "") << "\n";
  }
  art.json("estimate.json", meta);
  art.finish();
  out << "estimate: integral of h-hat = " << res.h_hat.integral() << "\n";
  return 0;
}

int cmd_rates(const Json& cfg, std::ostream& out)
{
  const std::string cmd = "rates";
  const Scenario s = load_scenario(get_req<std::string>(cfg, "scenario", cmd));
  const auto ns = get_n_list(cfg, cmd);
  if (ns.size() < 4)
    throw ConfigError("rates needs at least 4 sample sizes in n_list");
  const std::size_t reps = get_positive(cfg, "reps", cmd);
  if (reps < 30)
    throw ConfigError("rates needs reps >= 30, got " + std::to_string(reps));
  RateStudyConfig rc;
  rc.seed = get_seed(cfg, cmd);
  rc.workers = get_workers(cfg);
  rc.pipeline = get_pipeline(cfg);
  rc.kde = get_schedule(cfg, "kde", BandwidthRule::KdeBaseline);
  rc.efficiency = get_efficiency(cfg);
  rc.grid_points = rc.pipeline.grid_points;
  if (auto names = get_opt<std::vector<std::string>>(cfg, "estimators")) {
    rc.estimators.clear();
    for (const auto& n : *names)
      rc.estimators.push_back(rate_estimator_from_string(n));
  } else {
    rc.estimators = {RateEstimator::BaselineKde, RateEstimator::Convolution,
                     RateEstimator::Oracle, RateEstimator::Efficient};
  }
  Artifacts art(cfg, cmd);
  const auto reports = rate_study(s, ns, reps, rc);

  Json doc = {{"config", art.stable_config()}, {"scenario", s.to_json()}, {"reports", Json::array()}};
  std::vector<io::Series> series;
  for (const auto& r : reports) {
    doc["reports"].push_back(r.to_json());
    std::vector<double> n_col, log_n, med, q1, q3, log_med, e_n, e_rep, e_val;
    for (const auto& p : r.points) {
      n_col.push_back(static_cast<double>(p.n));
      log_n.push_back(std::log(static_cast<double>(p.n)));
      med.push_back(p.median);
      q1.push_back(p.q1);
      q3.push_back(p.q3);
      log_med.push_back(std::log(p.median));
      for (std::size_t k = 0; k < p.errors.size(); ++k) {
        e_n.push_back(static_cast<double>(p.n));
        e_rep.push_back(static_cast<double>(k));
        e_val.push_back(p.errors[k]);
      }
    }
    const io::Column cols[] = {{"n", n_col},    {"log_n", log_n}, {"median", med},
                               {"q1", q1},      {"q3", q3},       {"log_median", log_med}};
    art.csv("rates_" + r.estimator + ".csv", cols);
    const io::Column ecols[] = {{"n", e_n}, {"rep", e_rep}, {"sup_error", e_val}};
    art.csv("errors_" + r.estimator + ".csv", ecols);
    series.push_back({r.estimator, log_n, log_med});
    out << "rates: " << r.estimator << " slope " << r.slope << " (se " << r.slope_se << ")\n";
  }
  art.json("rates.json", doc);
  io::write_svg_lines(art.path("rates.svg"), "sup-norm error, " + s.name, "log n",
                      "log median sup error", series);
  art.added("rates.svg");
  art.finish();
  return 0;
}

int cmd_efficiency(const Json& cfg, std::ostream& out)
{
  const std::string cmd = "efficiency";
  const Scenario s = load_scenario(get_req<std::string>(cfg, "scenario", cmd));
  const std::size_t n = get_positive(cfg, "n", cmd);
  const std::size_t reps = get_positive(cfg, "reps", cmd);
  if (reps < 2)
    throw ConfigError("efficiency needs reps >= 2 for a variance");
  const double y = get_opt<double>(cfg, "y").value_or(0.8);
  HarnessConfig hc;
  hc.seed = get_seed(cfg, cmd);
  hc.workers = get_workers(cfg);
  hc.pipeline = get_pipeline(cfg);
  hc.grid_points = hc.pipeline.grid_points;
  const EfficiencyConfig ec = get_efficiency(cfg);
  Artifacts art(cfg, cmd);

  const auto study = efficiency_study(s, n, reps, y, hc, ec);
  std::vector<double> rep_idx(study.plain.size());
  for (std::size_t i = 0; i < rep_idx.size(); ++i)
    rep_idx[i] = static_cast<double>(i);
  const io::Column cols[] = {{"rep", rep_idx},
                             {"plain", study.plain},
                             {"corrected", study.corrected},
                             {"J_hat", study.J}};
  art.csv("efficiency_reps.csv", cols);
  Json doc = {{"config", art.stable_config()}, {"study", to_json(study)}};
  out << "efficiency: Var plain " << study.var_plain << " (Var I " << study.var_I
      << "), Var corrected " << study.var_corrected << " (Var I* " << study.var_I_star
      << "), median J-hat " << study.J_median << " vs " << study.J_true << "\n";

  if (cfg.contains("n_list")) {
    const auto ns = get_n_list(cfg, cmd);
    const auto rows = correction_check(s, ns, reps, hc, ec);
    std::vector<double> n_col, supC, supD, J;
    for (const auto& r : rows) {
      n_col.push_back(static_cast<double>(r.n));
      supC.push_back(r.sup_C_median);
      supD.push_back(r.sup_C_vs_truth_median);
      J.push_back(r.J_median);
      out << "efficiency: n = " << r.n << " median sqrt(n) sup|C-hat| = " << r.sup_C_median
          << "\n";
    }
    const io::Column ccols[] = {{"n", n_col},
                                {"median_sqrt_n_sup_C", supC},
                                {"median_sqrt_n_sup_C_minus_C", supD},
                                {"median_J_hat", J}};
    art.csv("collapse.csv", ccols);
    doc["collapse"] = to_json(rows);
  }
  art.json("efficiency.json", doc);
  art.finish();
  return 0;
}

int cmd_covariance(const Json& cfg, std::ostream& out)
{
  const std::string cmd = "covariance";
  const Scenario s = load_scenario(get_req<std::string>(cfg, "scenario", cmd));
  const auto points = get_opt<std::vector<double>>(cfg, "points").value_or(std::vector<double>{0.0, 0.5, 1.0});
  if (points.empty())
    throw ConfigError("covariance needs at least one point");
  const std::size_t draws = static_cast<std::size_t>(get_opt<long long>(cfg, "mc_draws").value_or(0));
  const std::uint64_t seed = draws > 0 ? get_seed(cfg, cmd) : 0;
  Artifacts art(cfg, cmd);
  const ScenarioTruth oracle(s);
  const auto rep = gamma(oracle, points);

  std::vector<double> sc, tc, g1, g2, g3, g, mc, mse;
  Json mc_doc = Json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      sc.push_back(points[i]);
      tc.push_back(points[j]);
      g1.push_back(rep.gamma1(i, j));
      g2.push_back(rep.gamma2(i, j));
      g3.push_back(rep.gamma3(i, j));
      g.push_back(rep.gamma(i, j));
      if (draws > 0) {
        const auto m = gamma_monte_carlo(oracle, points[i], points[j], draws,
                                         replication_seed(seed, i * points.size() + j));
        mc.push_back(m.value);
        mse.push_back(m.standard_error);
        mc_doc.push_back(Json{{"s", points[i]},
                          {"t", points[j]},
                          {"value", m.value},
                          {"standard_error", m.standard_error},
                          {"draws", m.draws},
                          {"z", (m.value - rep.gamma(i, j)) / m.standard_error}});
      }
    }
  }
  std::vector<io::Column> cols{{"s", sc},      {"t", tc},      {"gamma1", g1},
                               {"gamma2", g2}, {"gamma3", g3}, {"gamma", g}};
  if (draws > 0) {
    cols.push_back({"monte_carlo", mc});
    cols.push_back({"monte_carlo_se", mse});
  }
  art.csv("gamma.csv", cols);
  Json doc = {{"config", art.stable_config()}, {"report", rep.to_json()}};
  if (draws > 0)
    doc["monte_carlo"] = mc_doc;
  art.json("gamma.json", doc);
  art.finish();
  for (std::size_t i = 0; i < points.size(); ++i)
    out << "covariance: Gamma(" << points[i] << ", " << points[i] << ") = " << rep.gamma(i, i) << "\n";
  return 0;
}

int cmd_check(const Json& cfg, std::ostream& out, std::ostream& err)
{
  CheckOptions opt;
  if (cfg.contains("seed")) {
    if (!cfg.at("seed").is_number_unsigned())
      throw ConfigError("seed must be a nonnegative integer");
    opt.seed = cfg.at("seed").get<std::uint64_t>();
  }
  opt.inject_fault = get_opt<std::string>(cfg, "inject_fault");
  const auto manifests = get_opt<std::vector<std::string>>(cfg, "manifests").value_or(std::vector<std::string>{});

  auto results = run_invariant_suite(opt);
  Json mdoc = Json::array();
  for (const auto& m : manifests) {
    InvariantResult r;
    r.name = "manifest:" + m;
    try {
      const auto chk = io::verify_manifest(m);
      r.passed = chk.ok;
      r.value = static_cast<double>(chk.problems.size());
      r.detail = std::to_string(chk.files) + " files";
      for (const auto& p : chk.problems)
        r.detail += "; " + p;
      mdoc.push_back(Json{{"path", m}, {"ok", chk.ok}, {"files", chk.files}, {"problems", chk.problems}});
    } catch (const ConfigError& e) {
      r.passed = false;
      r.value = 1.0;
      r.detail = e.what();
      mdoc.push_back(Json{{"path", m}, {"ok", false}, {"files", 0}, {"problems", Json::array({e.what()})}});
    }
    results.push_back(r);
  }
  const auto first = first_failure(results);
  Json checks = Json::array();
  for (const auto& r : results) {
    checks.push_back(to_json(r));
    out << (r.passed ? "ok    " : "FAIL  ") << r.name << "  " << r.value << " <= " << r.tolerance
        << (r.detail.empty() ? "" : "  (" + r.detail + ")") << "\n";
  }
  Json report = {{"tool", "respdens"},
                 {"version", io::kToolVersion},
                 {"seed", opt.seed},
                 {"fault_injected", opt.inject_fault ? Json(*opt.inject_fault) : Json(nullptr)},
                 {"passed", !first.has_value()},
                 {"first_failure", first ? Json(*first) : Json(nullptr)},
                 {"checks", checks},
                 {"manifests", mdoc}};
  if (cfg.contains("out")) {
    Artifacts art(cfg, "check");
    art.json("check_report.json", report);
    art.finish();
  }
  if (first) {
    err << "invariant failure: " << *first << "\n";
    return 4;
  }
  out << "check: all " << results.size() << " invariants passed\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Flag parsing

struct Flags
{
  std::string config;
  std::string scenario;
  long long n = 0;
  std::vector<long long> n_list;
  long long reps = 0;
  std::uint64_t seed = 0;
  long long workers = 0;
  std::string path;
  long long fft_size = 0;
  long long grid_points = 0;
  std::string out;
  std::string data;
  double y = 0.0;
  std::vector<double> points;
  long long mc_draws = 0;
  std::vector<std::string> estimators;
  std::string inject_fault;
  std::vector<std::string> manifests;
  std::uint64_t shuffle_seed = 0;
  double conv_constant = 0, conv_exponent = 0, smoother_constant = 0, kde_constant = 0,
         score_constant = 0, score_exponent = 0;
};

//! Binds a flag to a config key; applied after the JSON document is loaded
//! so flags win.
struct Binding
{
  CLI::Option* opt;
  std::function<void(Json&)> apply;
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Response density estimation experiments", "respdens"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(io::kToolVersion));
  Flags f;
  std::vector<std::pair<CLI::App*, std::vector<Binding>>> subs;

  auto make = [&](const std::string& name, const std::string& help) {
    CLI::App* sc = app.add_subcommand(name, help);
    sc->add_option("--config", f.config, "JSON config document; flags override its fields");
    subs.push_back({sc, {}});
    return sc;
  };
  auto bind = [&](CLI::App* sc, CLI::Option* o, std::function<void(Json&)> fn) {
    for (auto& [app_ptr, b] : subs) {
      if (app_ptr == sc)
        b.push_back({o, std::move(fn)});
    }
  };
  auto scenario = [&](CLI::App* sc) {
    bind(sc, sc->add_option("--scenario", f.scenario, "built-in scenario name or JSON path"),
         [&](Json& j) { j["scenario"] = f.scenario; });
  };
  auto seed = [&](CLI::App* sc) {
    bind(sc, sc->add_option("--seed", f.seed, "master seed (mandatory)"),
         [&](Json& j) { j["seed"] = f.seed; });
  };
  auto n = [&](CLI::App* sc) {
    bind(sc, sc->add_option("--n", f.n, "sample size"), [&](Json& j) { j["n"] = f.n; });
  };
  auto n_list = [&](CLI::App* sc) {
    bind(sc, sc->add_option("--n-list", f.n_list, "comma-separated increasing sample sizes")->delimiter(','),
         [&](Json& j) { j["n_list"] = f.n_list; });
  };
  auto reps = [&](CLI::App* sc) {
    bind(sc, sc->add_option("--reps", f.reps, "Monte Carlo replications"),
         [&](Json& j) { j["reps"] = f.reps; });
  };
  auto workers = [&](CLI::App* sc) {
    bind(sc, sc->add_option("--workers", f.workers, "worker threads (default RESPDENS_WORKERS or 1)"),
         [&](Json& j) { j["workers"] = f.workers; });
  };
  auto output = [&](CLI::App* sc) {
    bind(sc, sc->add_option("--out", f.out, "output directory"), [&](Json& j) { j["out"] = f.out; });
  };
  auto estimator = [&](CLI::App* sc) {
    bind(sc, sc->add_option("--path", f.path, "direct or fft"), [&](Json& j) { j["path"] = f.path; });
    bind(sc, sc->add_option("--fft-size", f.fft_size, "FFT lattice size, a power of two >= 1024"),
         [&](Json& j) { j["fft_size"] = f.fft_size; });
    bind(sc, sc->add_option("--grid-points", f.grid_points, "output grid size"),
         [&](Json& j) { j["grid_points"] = f.grid_points; });
    bind(sc, sc->add_option("--conv-constant", f.conv_constant, "convolution bandwidth constant"),
         [&](Json& j) { j["bandwidth"]["convolution"]["constant"] = f.conv_constant; });
    bind(sc, sc->add_option("--conv-exponent", f.conv_exponent, "convolution bandwidth exponent"),
         [&](Json& j) { j["bandwidth"]["convolution"]["exponent"] = f.conv_exponent; });
    bind(sc, sc->add_option("--smoother-constant", f.smoother_constant, "smoother bandwidth constant"),
         [&](Json& j) { j["bandwidth"]["smoother"]["constant"] = f.smoother_constant; });
  };
  auto score = [&](CLI::App* sc) {
    bind(sc, sc->add_option("--score-constant", f.score_constant, "score bandwidth constant"),
         [&](Json& j) { j["bandwidth"]["score"]["constant"] = f.score_constant; });
    bind(sc, sc->add_option("--score-exponent", f.score_exponent, "score bandwidth exponent"),
         [&](Json& j) { j["bandwidth"]["score"]["exponent"] = f.score_exponent; });
    bind(sc, sc->add_option("--shuffle-seed", f.shuffle_seed, "shuffle before the sample split"),
         [&](Json& j) { j["shuffle_seed"] = f.shuffle_seed; });
  };
  auto flag = [&](CLI::App* sc, const std::string& name, const std::string& key, const std::string& help) {
    bind(sc, sc->add_flag(name, help), [key](Json& j) { j[key] = true; });
  };

  CLI::App* sim = make("simulate", "draw a dataset from a scenario");
  scenario(sim), n(sim), seed(sim), workers(sim), output(sim);
  flag(sim, "--oracle", "oracle", "add eps and r_x columns");

  CLI::App* est = make("estimate", "run the plug-in pipeline on a dataset");
  bind(est, est->add_option("--data", f.data, "dataset CSV with columns x, y"),
       [&](Json& j) { j["data"] = f.data; });
  scenario(est), n(est), seed(est), output(est), estimator(est), score(est);
  flag(est, "--efficient", "efficient", "also compute the efficiency correction");
  flag(est, "--compare-paths", "compare_paths", "report the sup difference to the other path");
  flag(est, "--clamp", "clamp", "clamp h-hat at zero and renormalize");

  CLI::App* rat = make("rates", "Monte Carlo convergence rates");
  scenario(rat), n_list(rat), reps(rat), seed(rat), workers(rat), output(rat), estimator(rat),
    score(rat);
  bind(rat, rat->add_option("--estimators", f.estimators, "baseline-kde,convolution,oracle,efficient")->delimiter(','),
       [&](Json& j) { j["estimators"] = f.estimators; });
  bind(rat, rat->add_option("--kde-constant", f.kde_constant, "baseline KDE bandwidth constant"),
       [&](Json& j) { j["bandwidth"]["kde"]["constant"] = f.kde_constant; });

  CLI::App* eff = make("efficiency", "variance of the plug-in and corrected estimators at a point");
  scenario(eff), n(eff), reps(eff), seed(eff), workers(eff), output(eff), estimator(eff), score(eff);
  n_list(eff);
  bind(eff, eff->add_option("--y", f.y, "evaluation point (default 0.8)"), [&](Json& j) { j["y"] = f.y; });

  CLI::App* cov = make("covariance", "limiting covariance by quadrature");
  scenario(cov), seed(cov), workers(cov), output(cov);
  bind(cov, cov->add_option("--points", f.points, "comma-separated points")->delimiter(','),
       [&](Json& j) { j["points"] = f.points; });
  bind(cov, cov->add_option("--mc-draws", f.mc_draws, "Monte Carlo cross-check draws per pair"),
       [&](Json& j) { j["mc_draws"] = f.mc_draws; });

  CLI::App* chk = make("check", "invariant suite and manifest verification");
  seed(chk), workers(chk), output(chk);
  bind(chk, chk->add_option("--inject-fault", f.inject_fault, "deliberately break one check"),
       [&](Json& j) { j["inject_fault"] = f.inject_fault; });
  bind(chk, chk->add_option("--manifest", f.manifests, "manifest.json to verify (repeatable)"),
       [&](Json& j) { j["manifests"] = f.manifests; });

  std::vector<const char*> argv{"respdens"};
  for (const auto& a : args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << io::kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    CLI::App* active = nullptr;
    const std::vector<Binding>* bindings = nullptr;
    for (auto& [sc, b] : subs) {
      if (sc->parsed()) {
        active = sc;
        bindings = &b;
      }
    }
    Json cfg = Json::object();
    if (!f.config.empty()) {
      cfg = io::read_json(f.config);
      if (!cfg.is_object())
        throw ConfigError("config '" + f.config + "' must be a JSON object");
      cfg["config"] = f.config;
    }
    for (const auto& b : *bindings) {
      if (b.opt->count() > 0)
        b.apply(cfg);
    }
    const std::string name = active->get_name();
    if (name == "simulate")
      return cmd_simulate(cfg, out);
    if (name == "estimate")
      return cmd_estimate(cfg, out);
    if (name == "rates")
      return cmd_rates(cfg, out);
    if (name == "efficiency")
      return cmd_efficiency(cfg, out);
    if (name == "covariance")
      return cmd_covariance(cfg, out);
    return cmd_check(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const InvariantFailure& e) {
    err << "invariant failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

} // namespace respdens::cli
