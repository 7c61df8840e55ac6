#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "report.hpp"
#include "tailcluster/errors.hpp"
#include "tailcluster/identities.hpp"
#include "tailcluster/maxstable.hpp"
#include "tailcluster/stats.hpp"

namespace tailcluster::cli {

namespace {

using json = nlohmann::ordered_json;

struct CommonOptions {
  std::string model_path;
  std::optional<std::uint64_t> seed;
  std::size_t n = 10'000;
  unsigned threads = 1;
  std::string out = "-";
  std::string format = "json";
};

unsigned default_threads() {
  if (const char* env = std::getenv("TAILCLUSTER_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("TAILCLUSTER_THREADS must be a positive integer");
  }
  return 1;
}

void add_common(CLI::App& app, CommonOptions& o, bool model_required) {
  auto* m = app.add_option("--model", o.model_path, "model config file (key = value)")->check(CLI::ExistingFile);
  if (model_required) m->required();
  app.add_option("--seed", o.seed, "random seed (required)")->required();
  app.add_option("--n", o.n, "Monte Carlo sample size")->check(CLI::PositiveNumber);
  app.add_option("--threads", o.threads, "worker threads (default: TAILCLUSTER_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "output path, '-' for stdout");
  app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-representation seed, independent of the order representations are listed in.
std::uint64_t derived_seed(std::uint64_t seed, std::string_view name) { return splitmix64(seed ^ fnv1a(name)); }

EstimatorOptions estimator_options(const CommonOptions& o, std::string_view name) {
  EstimatorOptions e;
  e.seed = derived_seed(*o.seed, name);
  e.n = o.n;
  e.parallel.threads = o.threads;
  return e;
}

json config_json(const LoadedConfig& cfg, const CommonOptions& o) {
  json j;
  j["model_file"] = o.model_path;
  json entries = json::object();
  for (const auto& [k, v] : cfg.entries) entries[k] = v;
  j["entries"] = entries;
  const RunSettings& s = cfg.settings;
  j["model"] = {{"kind", std::string(to_string(s.model.kind))},
                {"alpha", s.model.alpha},
                {"dim", s.model.dim_l},
                {"value_dim", s.model.dim_d},
                {"delta", s.model.grid_spacing}};
  j["window"] = s.window;
  j["lattice"] = s.lattice_text.empty() ? std::string("ambient") : s.lattice_text;
  j["seed"] = *o.seed;
  j["n"] = o.n;
  return j;
}

// ---------------------------------------------------------------- estimate

using EstimateFn = std::function<EstimateReport(const FieldSampler&, const LatticeSpec&, const RunSettings&,
                                                const EstimatorOptions&)>;
struct Representation {
  std::string name;
  bool experimental = false;
  EstimateFn run;
};

const std::vector<Representation>& representations() {
  static const std::vector<Representation> table = [] {
    std::vector<Representation> t;
    t.push_back({"samorodnitsky", false, [](auto& s, auto& l, auto&, auto& o) { return estimate_samorodnitsky(s, l, o); }});
    t.push_back({"berman_tau0", false, [](auto& s, auto& l, auto&, auto& o) { return estimate_berman(s, l, 0.0, o); }});
    t.push_back({"berman_tau_alpha", false,
                 [](auto& s, auto& l, auto&, auto& o) { return estimate_berman(s, l, s.alpha(), o); }});
    t.push_back({"berman", false, [](auto& s, auto& l, const RunSettings& r, auto& o) {
                   if (r.b != 1.0) throw ConfigError("berman with b != 1 needs --experimental");
                   return estimate_berman(s, l, r.tau, o, r.b);
                 }});
    t.push_back({"berman_b", true, [](auto& s, auto& l, const RunSettings& r, auto& o) {
                   return estimate_berman(s, l, r.tau, o, r.b, BermanVariant::corrected);
                 }});
    t.push_back({"berman_b_literal", true, [](auto& s, auto& l, const RunSettings& r, auto& o) {
                   return estimate_berman(s, l, r.tau, o, r.b, BermanVariant::literal);
                 }});
    t.push_back({"albin_b1", false, [](auto& s, auto& l, auto&, auto& o) { return estimate_albin(s, l, 1.0, o); }});
    t.push_back({"albin", false, [](auto& s, auto& l, const RunSettings& r, auto& o) { return estimate_albin(s, l, r.b, o); }});
    t.push_back({"albin_before", false, [](auto& s, auto& l, const RunSettings& r, auto& o) {
                   return estimate_albin(s, l, r.b, o, AlbinAnchor::before_origin);
                 }});
    t.push_back({"difference_theta", false,
                 [](auto& s, auto& l, auto&, auto& o) { return estimate_difference(s, l, false, o); }});
    t.push_back({"difference_z", false,
                 [](auto& s, auto& l, auto&, auto& o) { return estimate_difference(s, l, true, o); }});
    for (ClusterMethod m : all_cluster_methods()) {
      t.push_back({"cluster_sup_" + std::string(to_string(m)), false,
                   [m](auto& s, auto& l, const RunSettings& r, auto& o) {
                     ClusterConstructionSpec c = r.make_construction();
                     c.method = m;
                     c.lattice = l;
                     return estimate_cluster_sup(c, s, o);
                   }});
    }
    t.push_back({"mixed", true, [](auto& s, auto& l, const RunSettings& r, auto& o) {
                   return estimate_mixed(s, l, r.tau, r.b, o);
                 }});
    return t;
  }();
  return table;
}

std::vector<const Representation*> resolve_representations(const std::vector<std::string>& requested,
                                                           bool experimental) {
  std::vector<const Representation*> out;
  auto add = [&](const Representation* r) {
    for (auto* existing : out) {
      if (existing == r) return;
    }
    out.push_back(r);
  };
  for (const std::string& name : requested) {
    if (name == "all") {
      for (const auto& r : representations()) {
        if (!r.experimental && r.name != "berman" && r.name != "albin") add(&r);
      }
      continue;
    }
    const Representation* found = nullptr;
    for (const auto& r : representations()) {
      if (r.name == name) found = &r;
    }
    if (!found) throw ConfigError("unknown representation '" + name + "'");
    if (found->experimental && !experimental) {
      throw ConfigError("representation '" + name + "' is experimental; pass --experimental");
    }
    add(found);
  }
  return out;
}

struct EstimateArgs {
  std::vector<std::string> reps{"all"};
  bool experimental = false;
  bool self_normalized = false;
  bool window_drift = false;
};

void run_estimates(RunReport& report, const CommonOptions& o, const EstimateArgs& a, const LoadedConfig& cfg,
                   bool need_two) {
  const auto reps = resolve_representations(a.reps, a.experimental);
  if (need_two && reps.size() < 2) throw ConfigError("compare needs at least two representations");
  const RunSettings& s = cfg.settings;
  const LatticeSpec lattice = s.make_lattice();
  const FieldSampler sampler(s.model, s.make_window());
  for (const Representation* r : reps) {
    EstimatorOptions opt = estimator_options(o, r->name);
    opt.self_normalized = a.self_normalized;
    EstimateReport e;
    if (a.window_drift) {
      e = with_window_drift(s.model, sampler.window(),
                            [&](const FieldSampler& fs) { return r->run(fs, lattice, s, opt); });
    } else {
      e = r->run(sampler, lattice, s, opt);
    }
    e.representation = r->name;
    report.estimates.push_back(std::move(e));
  }
  if (s.model.kind == ModelKind::brown_resnick) {
    report.diagnostics["cholesky_jitter"] = sampler.jitter_used();
  }
}

void add_consistency(RunReport& report) {
  const ConsistencyVerdict v = consistency_report(report.estimates);
  json rows = json::array();
  for (const auto& p : v.pairs) {
    rows.push_back({{"first", report.estimates[p.first].representation},
                    {"second", report.estimates[p.second].representation},
                    {"z", number_or_null(p.z)}});
  }
  report.tables["consistency"] = rows;
  report.diagnostics["verdict"] = v.passed ? "PASS" : "FAIL";
  report.diagnostics["flagged"] = v.flagged;
  report.diagnostics["max_z"] = number_or_null(v.max_z);
}

// ---------------------------------------------------------------- simulate

void run_simulate(RunReport& report, const CommonOptions& o, const std::string& field, const LoadedConfig& cfg) {
  const RunSettings& s = cfg.settings;
  const FieldSampler sampler(s.model, s.make_window());
  std::optional<ClusterBuilder> builder;
  std::optional<ShiftDistribution> shift_dist;
  if (field == "Q" || field == "Z_N") builder.emplace(s.make_construction(), sampler);
  if (field == "Z_N") shift_dist = s.make_shift(sampler.window(), sampler.window());
  json rows = json::array();
  const Window& w = sampler.window();
  for (std::size_t i = 0; i < o.n; ++i) {
    RandomStream stream(*o.seed, i);
    WeightedDraw d;
    if (field == "Z") {
      d.sample = sampler.sample_Z(stream);
    } else if (field == "Theta") {
      d = sampler.sample_Theta(stream);
    } else if (field == "Y") {
      d = sampler.sample_Y(stream);
    } else if (field == "Q") {
      d = builder->draw(stream);
    } else {
      d = random_shift(fold_weight(builder->draw(stream), s.model.alpha), *shift_dist, s.model.alpha, stream);
    }
    for (std::size_t k = 0; k < w.size(); ++k) {
      const auto v = d.sample.value(k);
      rows.push_back({{"sample", i},
                      {"weight", d.weight},
                      {"t", w.point_at(k)},
                      {"value", std::vector<double>(v.begin(), v.end())}});
    }
  }
  report.tables["samples"] = rows;
  report.diagnostics["field"] = field;
}

// ---------------------------------------------------------- maxstable-check

std::vector<GridPoint> parse_points(const std::string& text, int dim) {
  std::vector<GridPoint> out;
  std::stringstream rows(text);
  std::string row;
  while (std::getline(rows, row, ';')) {
    GridPoint p;
    std::stringstream cols(row);
    std::string c;
    while (std::getline(cols, c, ',')) {
      try {
        std::size_t used = 0;
        p.push_back(std::stoll(c, &used));
        if (c.find_first_not_of(" ", used) != std::string::npos) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw ConfigError("bad point coordinate '" + c + "'");
      }
    }
    if (static_cast<int>(p.size()) != dim) throw ConfigError("point '" + row + "' has the wrong dimension");
    out.push_back(std::move(p));
  }
  if (out.empty()) throw ConfigError("need at least one point");
  return out;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string c;
  while (std::getline(in, c, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(c, &used));
      if (c.find_first_not_of(" ", used) != std::string::npos) throw std::invalid_argument(c);
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad ") + what + " entry '" + c + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return out;
}

struct MaxStableArgs {
  std::string rep = "both";
  std::string points = "0;1;2";
  std::string levels = "0.5,1,2";
  double epsilon = 0.01;
  std::size_t fidi_n = 0;
  std::size_t pilot_n = 10'000;
  Coord target_window = 0;
};

void run_maxstable(RunReport& report, const CommonOptions& o, const MaxStableArgs& a, const LoadedConfig& cfg) {
  const RunSettings& s = cfg.settings;
  const double alpha = s.model.alpha;
  const FieldSampler sampler(s.model, s.make_window());
  const std::vector<GridPoint> points = parse_points(a.points, s.model.dim_l);
  const std::vector<double> levels = parse_list(a.levels, "level");
  for (double x : levels) {
    if (!(x > 0.0)) throw ConfigError("levels must be positive");
  }
  Coord reach = a.target_window;
  for (const auto& p : points)
    for (Coord c : p) reach = std::max(reach, c < 0 ? -c : c);
  const Window target = Window::cube(s.model.dim_l, std::max<Coord>(reach, 1));
  const ClusterBuilder builder(s.make_construction(), sampler);
  const ShiftDistribution shift_dist = s.make_shift(sampler.window(), target);

  struct Source {
    std::string name;
    DrawSource draw;
    Window window;
  };
  std::vector<Source> sources;
  if (a.rep == "dehaan" || a.rep == "both") {
    sources.push_back({"dehaan", [&](RandomStream& st) { return WeightedDraw{sampler.sample_Z(st), 1.0}; },
                       sampler.window()});
  }
  if (a.rep == "rosinski" || a.rep == "both") {
    sources.push_back({"rosinski", rosinski_representer(builder, shift_dist, target), target});
  }

  // Level vectors for the joint check vary across points.
  const double spread[] = {1.0, 1.5, 0.75};
  auto joint_levels = [&](double x) {
    std::vector<double> v(points.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = x * spread[i % 3];
    return v;
  };

  EstimatorOptions fidi_opt = estimator_options(o, "fidi");
  fidi_opt.n = a.fidi_n ? a.fidi_n : 10 * o.n;
  struct Check {
    std::string kind;
    std::vector<GridPoint> pts;
    std::vector<double> lv;
    FidiEstimate fidi;
  };
  std::vector<Check> checks;
  for (double x : levels) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      checks.push_back({"point" + std::to_string(i), {points[i]}, {x}, {}});
    }
    if (points.size() > 1) checks.push_back({"joint", points, joint_levels(x), {}});
  }
  for (std::size_t k = 0; k < checks.size(); ++k) {
    EstimatorOptions opt = fidi_opt;
    opt.seed = derived_seed(fidi_opt.seed, std::to_string(k));
    checks[k].fidi = fidi_neglog(sampler, checks[k].pts, checks[k].lv, opt);
  }

  json fidi_rows = json::array();
  json ks_rows = json::array();
  std::vector<std::vector<double>> pooled;
  for (const Source& src : sources) {
    EstimatorOptions pilot = estimator_options(o, src.name + "_pilot");
    pilot.n = a.pilot_n;
    MaxStableSampleSpec spec;
    spec.points = points;
    spec.stopping_epsilon = a.epsilon;
    spec.sup_moment = pilot_sup_moment(src.draw, src.window, alpha, points, pilot);
    const auto samples = max_stable_batch(src.draw, alpha, src.window, spec, o.n,
                                          derived_seed(*o.seed, src.name), {o.threads, 1024});
    std::size_t truncated = 0;
    double terms = 0.0;
    for (const auto& smp : samples) {
      truncated += smp.truncated ? 1 : 0;
      terms += static_cast<double>(smp.terms);
    }
    report.diagnostics[src.name + "_sup_moment"] = spec.sup_moment;
    report.diagnostics[src.name + "_mean_terms"] = terms / static_cast<double>(samples.size());
    report.diagnostics[src.name + "_truncated"] = truncated;

    for (const Check& c : checks) {
      std::size_t below = 0;
      for (const auto& smp : samples) {
        bool all = true;
        for (std::size_t i = 0; i < c.pts.size(); ++i) {
          std::size_t idx = 0;
          while (points[idx] != c.pts[i]) ++idx;
          if (!(smp.values[idx] <= c.lv[i])) all = false;
        }
        below += all ? 1 : 0;
      }
      const double n = static_cast<double>(samples.size());
      const double p = static_cast<double>(below) / n;
      const double neglog = -std::log(p);
      const double se = p > 0.0 ? std::sqrt((1.0 - p) / (n * p)) : std::numeric_limits<double>::infinity();
      const double z = z_score(neglog, se, c.fidi.value, c.fidi.std_error);
      json lv = json::array();
      for (double v : c.lv) lv.push_back(v);
      fidi_rows.push_back({{"representation", src.name},
                           {"check", c.kind},
                           {"level", lv},
                           {"empirical_neglog", number_or_null(neglog)},
                           {"empirical_stderr", number_or_null(se)},
                           {"fidi_neglog", c.fidi.value},
                           {"fidi_stderr", c.fidi.std_error},
                           {"z", number_or_null(z)},
                           {"within_3se", std::isfinite(z) && z <= 3.0}});
    }
    std::vector<double> all_values;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::vector<double> marg;
      for (const auto& smp : samples) marg.push_back(smp.values[i]);
      all_values.insert(all_values.end(), marg.begin(), marg.end());
      const double ks = ks_one_sample(marg, [alpha](double x) { return x > 0 ? std::exp(-std::pow(x, -alpha)) : 0.0; });
      ks_rows.push_back({{"test", "frechet_" + src.name + "_point" + std::to_string(i)}, {"ks", ks}});
    }
    pooled.push_back(std::move(all_values));
  }
  if (pooled.size() == 2) {
    ks_rows.push_back({{"test", "dehaan_vs_rosinski_pooled"}, {"ks", ks_two_sample(pooled[0], pooled[1])}});
  }
  report.tables["fidi"] = fidi_rows;
  report.tables["ks"] = ks_rows;
}

// ----------------------------------------------------------- identity-check

struct IdentityArgs {
  std::string battery;
  std::string identity;
  std::string functional = "ratio_next";
  int side = 1;
  Coord h = 1;
  double x = 2.0;
  double tau = 0.0;
  Coord k_radius = 1;
  bool constant = false;
  bool swap_seeds = false;
};

void run_identities(RunReport& report, const CommonOptions& o, const IdentityArgs& a,
                    const std::optional<LoadedConfig>& cfg) {
  std::vector<IdentityCase> cases;
  if (!a.battery.empty()) {
    if (a.battery != "default") throw ConfigError("unknown battery '" + a.battery + "'");
    cases = default_battery(o.n, *o.seed);
  } else {
    if (a.identity.empty()) throw ConfigError("identity-check needs --battery or --identity");
    if (!cfg) throw ConfigError("--identity needs --model");
    IdentityCase c;
    c.identity = parse_identity(a.identity);
    c.model = cfg->settings.model;
    c.window = cfg->settings.make_window();
    c.functional = a.functional;
    c.side = a.side;
    c.h = a.h;
    c.x = a.x;
    c.tau = a.tau;
    c.k_radius = a.k_radius;
    c.constant_functional = a.constant;
    c.n = o.n;
    c.seed = *o.seed;
    cases.push_back(c);
  }
  for (auto& c : cases) {
    c.parallel.threads = o.threads;
    c.swap_seeds = a.swap_seeds;
  }
  const BatteryVerdict v = run_battery(cases);
  json rows = json::array();
  for (const auto& r : v.results) {
    const double az = std::fabs(r.z);
    rows.push_back({{"case", r.label},
                    {"lhs", r.lhs},
                    {"lhs_std_error", r.lhs_std_error},
                    {"rhs", r.rhs},
                    {"rhs_std_error", r.rhs_std_error},
                    {"z", number_or_null(r.z)},
                    {"verdict", az < 4.0 ? "ok" : (az < 5.0 ? "flagged" : "fail")}});
  }
  report.tables["identities"] = rows;
  report.diagnostics["verdict"] = v.passed ? "PASS" : "FAIL";
  report.diagnostics["cases"] = v.results.size();
  report.diagnostics["flagged"] = v.flagged;
  report.diagnostics["max_abs_z"] = number_or_null(v.max_abs_z);
}

// ---------------------------------------------------------------- m-approx

struct MApproxArgs {
  std::string m_list = "1,2,4,8";
  Coord scale = 1000;
};

void run_m_approx(RunReport& report, const CommonOptions& o, const MApproxArgs& a, const LoadedConfig& cfg) {
  const RunSettings& s = cfg.settings;
  if (a.scale < 1) throw ConfigError("--scale must be at least 1");
  const std::vector<double> ms = parse_list(a.m_list, "m");
  const FieldSampler sampler(s.model, s.make_window());
  const ClusterBuilder builder(s.make_construction(), sampler);
  const Window target = Window::cube(s.model.dim_l, (a.scale + 1) / 2);
  const ShiftDistribution shift_dist = s.make_shift(sampler.window(), target);
  const double norm = std::pow(static_cast<double>(a.scale), s.model.dim_l);
  const auto points = estimate_m_truncation(builder, shift_dist, target, norm, ms, estimator_options(o, "m_approx"));
  json rows = json::array();
  for (const auto& p : points) rows.push_back({{"m", p.m}, {"error", p.value}, {"std_error", p.std_error}});
  report.tables["m_approx"] = rows;
  report.diagnostics["construction"] = std::string(to_string(s.construction));
  report.diagnostics["scale"] = a.scale;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo toolkit for cluster fields, extremal indices and max-stable fields", "tailcluster"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(build_id()));

  CommonOptions common;
  EstimateArgs est;
  MaxStableArgs ms;
  IdentityArgs id;
  MApproxArgs ma;
  std::string field = "Z";

  try {
    common.threads = default_threads();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  auto* simulate = app.add_subcommand("simulate", "sample fields and write them as rows");
  add_common(*simulate, common, true);
  simulate->add_option("--field", field, "Z, Theta, Y, Q or Z_N")->check(CLI::IsMember({"Z", "Theta", "Y", "Q", "Z_N"}));

  auto* estimate = app.add_subcommand("estimate", "estimate the extremal index by several representations");
  auto* compare = app.add_subcommand("compare", "estimate and report pairwise z-scores");
  for (auto* sub : {estimate, compare}) {
    add_common(*sub, common, true);
    sub->add_option("--rep", est.reps, "representation name or 'all' (repeatable, comma separated)")
        ->delimiter(',');
    sub->add_flag("--experimental", est.experimental, "allow experimental representations");
    sub->add_flag("--self-normalized", est.self_normalized, "divide by the realized weight sum");
    sub->add_flag("--window-drift", est.window_drift, "rerun on the doubled window and report the drift");
  }

  auto* maxstable = app.add_subcommand("maxstable-check", "simulate the max-stable field and compare fidis");
  add_common(*maxstable, common, true);
  maxstable->add_option("--rep", ms.rep, "dehaan, rosinski or both")->check(CLI::IsMember({"dehaan", "rosinski", "both"}));
  maxstable->add_option("--points", ms.points, "points as 'x,y;x,y' in grid units");
  maxstable->add_option("--levels", ms.levels, "comma separated levels");
  maxstable->add_option("--epsilon", ms.epsilon, "stopping tolerance in (0, 0.1]");
  maxstable->add_option("--fidi-n", ms.fidi_n, "draws for the fidi Monte Carlo (default 10 n)");
  maxstable->add_option("--pilot-n", ms.pilot_n, "draws for the stopping-rule pilot");
  maxstable->add_option("--target-window", ms.target_window, "half-width of the Rosinski target window");

  auto* identity = app.add_subcommand("identity-check", "check distributional identities numerically");
  add_common(*identity, common, false);
  identity->add_option("--battery", id.battery, "named battery ('default')");
  identity->add_option("--identity", id.identity, "single identity id");
  identity->add_option("--functional", id.functional, "test functional id");
  identity->add_option("--side", id.side, "right-hand side index for multi-way identities");
  identity->add_option("--lag", id.h, "lag h");
  identity->add_option("--x", id.x, "level");
  identity->add_option("--tau", id.tau, "exceedance exponent");
  identity->add_option("--k-radius", id.k_radius, "half-width of K");
  identity->add_flag("--constant", id.constant, "use the constant functional");
  identity->add_flag("--swap-seeds", id.swap_seeds, "swap the seeds of the two sides");

  auto* mapprox = app.add_subcommand("m-approx", "truncation error of m-dependent approximations");
  add_common(*mapprox, common, true);
  mapprox->add_option("--m-list", ma.m_list, "comma separated truncation radii");
  mapprox->add_option("--scale", ma.scale, "n in n K with K = [0, 1]^l");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunReport report;
  report.command = sub->get_name();
  const auto started = std::chrono::steady_clock::now();
  try {
    std::optional<LoadedConfig> cfg;
    if (!common.model_path.empty()) cfg = load_config(common.model_path);
    if (cfg) report.config = config_json(*cfg, common);
    else report.config = {{"seed", *common.seed}, {"n", common.n}};

    if (sub == simulate) {
      report.config["field"] = field;
      run_simulate(report, common, field, *cfg);
    } else if (sub == estimate || sub == compare) {
      report.config["representations"] = est.reps;
      report.config["self_normalized"] = est.self_normalized;
      run_estimates(report, common, est, *cfg, sub == compare);
      if (sub == compare) add_consistency(report);
    } else if (sub == maxstable) {
      report.config["points"] = ms.points;
      report.config["levels"] = ms.levels;
      report.config["epsilon"] = ms.epsilon;
      run_maxstable(report, common, ms, *cfg);
    } else if (sub == identity) {
      report.config["battery"] = id.battery;
      run_identities(report, common, id, cfg);
    } else if (sub == mapprox) {
      report.config["m_list"] = ma.m_list;
      report.config["scale"] = ma.scale;
      run_m_approx(report, common, ma, *cfg);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const ContractViolation& e) {
    err << "contract violation: " << e.what() << '\n';
    return 3;
  }
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const OutputFormat format = common.format == "csv" ? OutputFormat::csv : OutputFormat::json;
  if (common.out == "-") {
    write_report(report, format, out);
  } else {
    std::ofstream file(common.out);
    if (!file) {
      err << "error: cannot write '" << common.out << "'\n";
      return 2;
    }
    write_report(report, format, file);
  }
  return 0;
}

}  // namespace tailcluster::cli
