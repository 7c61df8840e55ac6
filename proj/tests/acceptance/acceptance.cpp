// Acceptance suite. Prints one PASS/FAIL line per criterion followed by the
// individual clauses. Exit status is nonzero when a clause fails, unless every
// failing clause was named with --known-failure.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "tailcluster/errors.hpp"
#include "tailcluster/extremal.hpp"
#include "tailcluster/identities.hpp"
#include "tailcluster/maxstable.hpp"
#include "tailcluster/stats.hpp"

using namespace tailcluster;
using json = nlohmann::json;

namespace {

struct Clause {
  std::string id;
  bool ok = false;
  std::string detail;
};

struct Outcome {
  std::vector<Clause> clauses;
  double seconds = 0.0;

  void add(std::string id, bool ok, std::string detail) { clauses.push_back({std::move(id), ok, std::move(detail)}); }
  bool passed() const {
    for (const auto& c : clauses)
      if (!c.ok) return false;
    return true;
  }
};

struct Context {
  std::uint64_t seed = 20261016;
  unsigned threads = 1;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derived(std::uint64_t seed, std::string_view name) { return splitmix64(seed ^ fnv1a(name)); }

EstimatorOptions options(const Context& ctx, std::string_view name, std::size_t n, unsigned threads) {
  EstimatorOptions o;
  o.seed = derived(ctx.seed, name);
  o.n = n;
  o.parallel.threads = threads;
  return o;
}

ModelSpec ar1(double alpha) {
  ModelSpec m;
  m.kind = ModelKind::ar1_tail_chain;
  m.phi = 0.5;
  m.alpha = alpha;
  return m;
}

ModelSpec moving_max(double alpha) {
  ModelSpec m;
  m.kind = ModelKind::moving_max;
  m.coeffs = {{2.0}, {1.0}};
  m.alpha = alpha;
  return m;
}

ModelSpec brown_resnick() {
  ModelSpec m;
  m.kind = ModelKind::brown_resnick;
  m.variogram_slope = 10.0;
  return m;
}

ClusterConstructionSpec construction(ClusterMethod method, const LatticeSpec& lattice) {
  ClusterConstructionSpec c;
  c.method = method;
  c.lattice = lattice;
  return c;
}

std::string describe(const EstimateReport& r) {
  return r.representation + " = " + fmt(r.value, 8) + " +- " + fmt(r.std_error, 3) +
         " (per-draw var " + fmt(r.sample_variance, 3) + ")";
}

/// |value - expected| <= 3 stderr + tolerance; the tolerance absorbs window truncation.
void near(Outcome& out, const std::string& id, const EstimateReport& r, double expected, double tolerance = 1e-12) {
  const bool ok = std::fabs(r.value - expected) <= 3.0 * r.std_error + tolerance;
  out.add(id, ok, describe(r) + ", target " + fmt(expected, 8));
}

/// The battery used by the consistency criteria, in a fixed order.
std::vector<EstimateReport> full_battery(const Context& ctx, const FieldSampler& sampler, std::size_t n,
                                         unsigned threads) {
  const LatticeSpec lattice = LatticeSpec::ambient(1, sampler.model().grid_spacing);
  const double alpha = sampler.alpha();
  std::vector<EstimateReport> out;
  out.push_back(estimate_samorodnitsky(sampler, lattice, options(ctx, "samorodnitsky", n, threads)));
  out.push_back(estimate_berman(sampler, lattice, 0.0, options(ctx, "berman_tau0", n, threads)));
  out.push_back(estimate_berman(sampler, lattice, alpha, options(ctx, "berman_tau_alpha", n, threads)));
  out.push_back(estimate_albin(sampler, lattice, 1.0, options(ctx, "albin_b1", n, threads)));
  out.push_back(estimate_albin(sampler, lattice, 2.0, options(ctx, "albin_b2", n, threads)));
  out.push_back(estimate_difference(sampler, lattice, false, options(ctx, "difference_theta", n, threads)));
  out.push_back(estimate_difference(sampler, lattice, true, options(ctx, "difference_z", n, threads)));
  for (ClusterMethod m : all_cluster_methods()) {
    const std::string name = "cluster_sup_" + std::string(to_string(m));
    out.push_back(estimate_cluster_sup(construction(m, lattice), sampler, options(ctx, name, n, threads)));
  }
  return out;
}

double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// ------------------------------------------------------------------ criteria

Outcome moving_max_exactness(const Context& ctx) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const FieldSampler s(moving_max(1.0), Window::cube(1, 8));
  const LatticeSpec z = LatticeSpec::ambient(1);
  const std::size_t n = 100'000;
  const double target = 2.0 / 3.0;
  auto exact = [&](const std::string& id, const EstimateReport& r) {
    near(out, id + "_value", r, target);
    out.add(id + "_variance", r.sample_variance < 1e-20, describe(r) + ", needs per-draw var < 1e-20");
  };
  exact("samorodnitsky", estimate_samorodnitsky(s, z, options(ctx, "samorodnitsky", n, 1)));
  exact("difference_theta", estimate_difference(s, z, false, options(ctx, "difference_theta", n, 1)));
  exact("cluster_sup_ffd_theta",
        estimate_cluster_sup(construction(ClusterMethod::ffd_theta, z), s, options(ctx, "cluster_sup_ffd_theta", n, 1)));
  for (const EstimateReport& r : {estimate_berman(s, z, 0.0, options(ctx, "berman_tau0", n, 1)),
                                  estimate_albin(s, z, 1.0, options(ctx, "albin_b1", n, 1))}) {
    near(out, r.representation, r, target);
    out.add(r.representation + "_stderr", r.std_error <= 0.01, "stderr " + fmt(r.std_error, 3) + " <= 0.01");
  }
  out.seconds = elapsed(start);
  out.add("runtime", out.seconds < 30.0, fmt(out.seconds, 3) + " s single worker, limit 30 s");
  return out;
}

Outcome ar1_closed_form(const Context& ctx) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  for (double alpha : {1.0, 2.0}) {
    const FieldSampler s(ar1(alpha), Window::cube(1, 32));
    const double target = 1.0 - std::pow(0.5, alpha);
    const std::string tag = "alpha" + fmt(alpha) + "/";
    const auto reports = full_battery(ctx, s, 100'000, ctx.threads);
    for (const auto& r : reports) near(out, tag + r.representation, r, target, 1e-6);
    const EstimateReport& sam = reports.front();
    const bool constant = std::fabs(sam.value - target) <= 1e-6 && std::sqrt(sam.sample_variance) <= 1e-6;
    out.add(tag + "samorodnitsky_constant", constant,
            "|mean - target| = " + fmt(std::fabs(sam.value - target), 3) + ", per-draw sd " +
                fmt(std::sqrt(sam.sample_variance), 3) + ", tolerance 1e-6");
  }
  out.seconds = elapsed(start);
  return out;
}

Outcome brown_resnick_consistency(const Context& ctx) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const FieldSampler s(brown_resnick(), Window::cube(1, 32));
  const auto reports = full_battery(ctx, s, 100'000, ctx.threads);
  const ConsistencyVerdict v = consistency_report(reports);
  std::string values;
  for (const auto& r : reports) values += "\n      " + describe(r);
  out.add("pairwise", v.passed && v.flagged <= 2,
          std::to_string(reports.size()) + " estimators, " + std::to_string(v.pairs.size()) + " pairs, max z " +
              fmt(v.max_z, 3) + ", flagged " + std::to_string(v.flagged) + values);
  out.seconds = elapsed(start);
  out.add("runtime", out.seconds < 600.0, fmt(out.seconds, 3) + " s, limit 600 s");
  return out;
}

Outcome pareto_law(const Context& ctx) {
  Outcome out;
  const LatticeSpec z = LatticeSpec::ambient(1);
  const FieldSampler a(ar1(1.0), Window::cube(1, 32));
  const FieldSampler m(moving_max(2.0), Window::cube(1, 8));
  for (const auto& [name, sampler] : {std::pair<std::string, const FieldSampler*>{"ar1_alpha1", &a},
                                      std::pair<std::string, const FieldSampler*>{"moving_max_alpha2", &m}}) {
    const ParetoCheck p = pareto_conditional_check(*sampler, z, 1.0, 10'000, derived(ctx.seed, "pareto_" + name),
                                                   {ctx.threads, 1024});
    out.add(name, p.ks < 0.02 && p.min_value >= 1.0,
            "KS " + fmt(p.ks, 4) + " over " + std::to_string(p.accepted) + " conditional draws, min " +
                fmt(p.min_value, 6));
  }
  return out;
}

Outcome shift_invariance(const Context& ctx) {
  Outcome out;
  const LatticeSpec z = LatticeSpec::ambient(1);
  for (const auto& [name, model, half] : {std::tuple{std::string("ar1"), ar1(1.0), Coord{32}},
                                          std::tuple{std::string("moving_max"), moving_max(1.0), Coord{8}}}) {
    const FieldSampler s(model, Window::cube(1, half));
    const ClusterBuilder builder(construction(ClusterMethod::ffd_theta, z), s);
    // Q lives on [-half, half]; Z_N(0) != 0 forces |N| <= half, so the target keeps all of Q.
    const Window target = Window::cube(1, 2 * half);
    const auto geometric = ShiftDistribution::symmetric_geometric(1, 0.5);
    const auto uniform = ShiftDistribution::covering(s.window(), target);
    const std::size_t n = 100'000;
    const EstimateReport g = estimate_difference(rosinski_representer(builder, geometric, target), target, z, 1.0,
                                                 options(ctx, name + "_geometric", n, ctx.threads), "z_n_geometric");
    const EstimateReport u = estimate_difference(rosinski_representer(builder, uniform, target), target, z, 1.0,
                                                 options(ctx, name + "_uniform", n, ctx.threads), "z_n_uniform");
    const double zs = z_score(g.value, g.std_error, u.value, u.std_error);
    out.add(name, zs < 3.0, describe(g) + " vs " + describe(u) + ", z " + fmt(zs, 3));
  }
  return out;
}

Outcome identity_battery(const Context& ctx) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  auto cases = default_battery(100'000, derived(ctx.seed, "identities"));
  for (auto& c : cases) c.parallel.threads = ctx.threads;
  const BatteryVerdict v = run_battery(cases);
  std::set<std::string> identities;
  for (const auto& c : cases) identities.insert(std::string(to_string(c.identity)) + "/" + std::string(to_string(c.model.kind)));
  std::string worst;
  double worst_z = -1.0;
  for (const auto& r : v.results) {
    if (std::fabs(r.z) > worst_z) {
      worst_z = std::fabs(r.z);
      worst = r.label;
    }
  }
  out.add("coverage", cases.size() >= 20 && identities.size() == 12,
          std::to_string(cases.size()) + " cases over " + std::to_string(identities.size()) + " identity/model pairs");
  out.add("battery", v.passed && v.flagged <= 2,
          "max |z| " + fmt(v.max_abs_z, 3) + " (" + worst + "), flagged " + std::to_string(v.flagged));
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (!cases[i].constant_functional) continue;
    const IdentityResult& r = v.results[i];
    const double closed = std::pow(cases[i].x, -cases[i].model.alpha);
    const bool ok = std::fabs(r.lhs - closed) <= 3.0 * r.lhs_std_error && std::fabs(r.rhs - closed) <= 3.0 * r.rhs_std_error;
    out.add(r.label, ok,
            "lhs " + fmt(r.lhs, 6) + " +- " + fmt(r.lhs_std_error, 3) + ", rhs " + fmt(r.rhs, 6) + " +- " +
                fmt(r.rhs_std_error, 3) + ", closed form " + fmt(closed, 6));
  }
  out.seconds = elapsed(start);
  return out;
}

/// Runs the CLI maxstable-check and grades its tables.
void grade_maxstable(Outcome& out, const Context& ctx, const std::string& tag, std::vector<std::string> args) {
  args.insert(args.begin(), {"tailcluster", "maxstable-check", "--seed", std::to_string(derived(ctx.seed, tag)),
                             "--threads", std::to_string(ctx.threads), "--format", "json"});
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream text, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), text, err);
  if (code != 0) {
    out.add(tag + "/run", false, "exit " + std::to_string(code) + ": " + err.str());
    return;
  }
  const json report = json::parse(text.str());
  std::size_t within = 0, total = 0;
  double max_z = 0.0;
  for (const auto& row : report["tables"]["fidi"]) {
    ++total;
    within += row["within_3se"].get<bool>() ? 1 : 0;
    if (row["z"].is_number()) max_z = std::max(max_z, row["z"].get<double>());
  }
  out.add(tag + "/fidi", total > 0 && within == total,
          std::to_string(within) + "/" + std::to_string(total) + " checks within 3 combined stderr, max z " + fmt(max_z, 3));
  for (const auto& row : report["tables"]["ks"]) {
    const std::string test = row["test"];
    const double ks = row["ks"];
    out.add(tag + "/" + test, ks < 0.02, "KS " + fmt(ks, 4));
  }
}

Outcome max_stable_fidi(const Context& ctx) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const std::string dir = TAILCLUSTER_CONFIG_DIR;
  grade_maxstable(out, ctx, "moving_max",
                  {"--model", dir + "/moving_max.cfg", "--points", "0;1;2", "--levels", "0.5,1,2", "--n", "10000",
                   "--fidi-n", "100000", "--epsilon", "0.01"});
  grade_maxstable(out, ctx, "brown_resnick",
                  {"--model", dir + "/brown_resnick_fine.cfg", "--points", "0;1;2", "--levels", "0.5,1,2", "--n",
                   "10000", "--fidi-n", "100000", "--epsilon", "0.01", "--target-window", "2"});
  out.seconds = elapsed(start);
  return out;
}

/// Exact truncation error for the AR(1) cluster {0: 1, t > 0: phi^t}, kept with
/// probability 1/2, spread by a uniform shift over `box` onto `target`.
double truncation_oracle(double m, Coord box, Coord target, double scale) {
  double total = 0.0;
  for (Coord n = -box; n <= box; ++n) {
    // sup over t in target with t - n > m of 0.5^(t - n): the smallest admissible lag.
    const Coord lag = std::max<Coord>(static_cast<Coord>(std::floor(m)) + 1, -target - n);
    if (n + lag <= target) total += std::pow(0.5, static_cast<double>(lag));
  }
  return 0.5 * total / scale;
}

Outcome truncation(const Context& ctx) {
  Outcome out;
  const FieldSampler s(ar1(1.0), Window::cube(1, 32));
  const LatticeSpec z = LatticeSpec::ambient(1);
  const ClusterBuilder builder(construction(ClusterMethod::hoff_involution_theta, z), s);
  const double scale = 1000.0;
  const Coord reach = 500;
  const Window target = Window::cube(1, reach);  // the 1001 points of [-500, 500]
  const auto shift = ShiftDistribution::covering(s.window(), target);
  const std::vector<double> ms = {1, 2, 4, 8};
  const auto pts = estimate_m_truncation(builder, shift, target, scale, ms,
                                         options(ctx, "m_truncation", 100'000, ctx.threads));
  std::string table;
  bool matches = true;
  for (const auto& p : pts) {
    const double exact = truncation_oracle(p.m, reach + 32, reach, scale);
    matches = matches && std::fabs(p.value - exact) <= 3.0 * p.std_error;
    table += " m=" + fmt(p.m) + ": " + fmt(p.value, 5) + " +- " + fmt(p.std_error, 2) + " (exact " + fmt(exact, 5) + ");";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    monotone = monotone && pts[i].value <= pts[i - 1].value + 3.0 * std::hypot(pts[i].std_error, pts[i - 1].std_error);
  }
  out.add("nonincreasing", monotone, table);
  out.add("oracle", matches, "each m within 3 stderr of the exact error");
  out.add("m8_below_1e-3", pts.back().value < 1e-3, "m=8 error " + fmt(pts.back().value, 5) + " +- " + fmt(pts.back().std_error, 2));
  return out;
}

template <class T>
bool same_bytes(const T& a, const T& b) {
  return std::memcmp(&a, &b, sizeof(T)) == 0;
}

Outcome determinism(const Context& ctx) {
  Outcome out;
  auto identical = [](const std::vector<EstimateReport>& a, const std::vector<EstimateReport>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!same_bytes(a[i].value, b[i].value) || !same_bytes(a[i].std_error, b[i].std_error) ||
          !same_bytes(a[i].sample_variance, b[i].sample_variance) || !same_bytes(a[i].n_effective, b[i].n_effective)) {
        return false;
      }
    }
    return true;
  };
  {
    const FieldSampler s(moving_max(1.0), Window::cube(1, 8));
    const auto one = full_battery(ctx, s, 100'000, 1);
    const auto eight = full_battery(ctx, s, 100'000, 8);
    out.add("moving_max_battery", identical(one, eight), std::to_string(one.size()) + " estimators, n = 1e5");
  }
  {
    const FieldSampler s(brown_resnick(), Window::cube(1, 32));
    const auto one = full_battery(ctx, s, 20'000, 1);
    const auto eight = full_battery(ctx, s, 20'000, 8);
    out.add("brown_resnick_battery", identical(one, eight), std::to_string(one.size()) + " estimators, n = 2e4");
  }
  {
    const FieldSampler s(moving_max(1.0), Window::cube(1, 8));
    MaxStableSampleSpec spec;
    spec.points = {{0}, {1}, {2}};
    spec.sup_moment = 2.0;
    auto draw = [&s](RandomStream& st) { return WeightedDraw{s.sample_Z(st), 1.0}; };
    const auto one = max_stable_batch(draw, 1.0, s.window(), spec, 5'000, derived(ctx.seed, "batch"), {1, 1024});
    const auto eight = max_stable_batch(draw, 1.0, s.window(), spec, 5'000, derived(ctx.seed, "batch"), {8, 1024});
    bool same = one.size() == eight.size();
    for (std::size_t i = 0; same && i < one.size(); ++i) {
      same = one[i].terms == eight[i].terms &&
             std::memcmp(one[i].values.data(), eight[i].values.data(), one[i].values.size() * sizeof(double)) == 0;
    }
    out.add("max_stable_batch", same, "5000 de Haan samples at 3 points");
  }
  {
    const FieldSampler a(ar1(1.0), Window::cube(1, 32));
    const LatticeSpec z = LatticeSpec::ambient(1);
    const ParetoCheck p1 = pareto_conditional_check(a, z, 1.0, 5'000, derived(ctx.seed, "pareto"), {1, 1024});
    const ParetoCheck p8 = pareto_conditional_check(a, z, 1.0, 5'000, derived(ctx.seed, "pareto"), {8, 1024});
    out.add("pareto_check", same_bytes(p1.ks, p8.ks) && p1.attempts == p8.attempts, "KS " + fmt(p1.ks, 6));
  }
  return out;
}

const std::map<int, std::pair<std::string, std::function<Outcome(const Context&)>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<Outcome(const Context&)>>> table = {
      {1, {"moving-max exactness", moving_max_exactness}},
      {2, {"AR(1) closed form", ar1_closed_form}},
      {3, {"Brown-Resnick cross-representation consistency", brown_resnick_consistency}},
      {4, {"conditional Pareto law", pareto_law}},
      {5, {"shift-law invariance", shift_invariance}},
      {6, {"identity battery", identity_battery}},
      {7, {"max-stable finite-dimensional laws", max_stable_fidi}},
      {8, {"m-truncation", truncation}},
      {9, {"worker-count determinism", determinism}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tailcluster acceptance suite"};
  std::vector<int> selected;
  std::vector<std::string> known;
  Context ctx;
  app.add_option("--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--known-failure", known, "clause id (criterion:clause) expected to fail");
  app.add_option("--seed", ctx.seed, "base seed");
  app.add_option("--threads", ctx.threads, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    for (const auto& [k, v] : criteria()) selected.push_back(k);
  }
  const std::set<std::string> expected(known.begin(), known.end());

  int status = 0;
  std::set<std::string> failed_known;
  for (int k : selected) {
    const auto& [title, run] = criteria().at(k);
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = run(ctx);
    } catch (const std::exception& e) {
      o.add("exception", false, e.what());
    }
    const double seconds = elapsed(start);
    std::cout << "criterion " << k << ": " << (o.passed() ? "PASS" : "FAIL") << "  " << title << " (" << fmt(seconds, 3)
              << " s)\n";
    for (const auto& c : o.clauses) {
      const std::string id = std::to_string(k) + ":" + c.id;
      const bool is_known = expected.contains(id);
      std::cout << "  " << (c.ok ? "ok  " : (is_known ? "FAIL (known) " : "FAIL ")) << id << ": " << c.detail << "\n";
      if (!c.ok && is_known) failed_known.insert(id);
      if (!c.ok && !is_known) status = 1;
    }
    std::cout.flush();
  }
  for (const auto& id : expected) {
    const int k = std::stoi(id.substr(0, id.find(':')));
    if (std::find(selected.begin(), selected.end(), k) != selected.end() && !failed_known.contains(id)) {
      std::cout << "note: known failure " << id << " did not fail\n";
      status = 1;
    }
  }
  return status;
}
