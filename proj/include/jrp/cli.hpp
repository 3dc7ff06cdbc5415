#pragma once

#include <charconv>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "jrp/baselines.hpp"
#include "jrp/eptas.hpp"
#include "jrp/io.hpp"
#include "jrp/lotsizing.hpp"
#include "jrp/oracle.hpp"
#include "jrp/reduction.hpp"

namespace jrp::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kParse = 2, kOptions = 3, kBudget = 4 };

// ---------------------------------------------------------------------------
// Instance generation

struct GenOptions {
  int items = 1;
  std::optional<int> periods;  // discrete when set
  std::uint64_t seed = 1;
  std::pair<double, double> k0_range{0.1, 50.0};
  std::pair<double, double> k_range{0.1, 50.0};
  std::pair<double, double> h_range{0.05, 5.0};
  bool log_uniform = true;
};

inline void check_range(const std::pair<double, double>& r, const char* name) {
  if (!(r.first > 0.0) || !(r.second >= r.first) || !std::isfinite(r.second))
    throw InvalidOption(std::string(name) + " must satisfy 0 < lo <= hi");
}

class Generator {
 public:
  explicit Generator(const GenOptions& o) : o_(o), rng_(o.seed) {
    if (o.items < 1) throw InvalidOption("--n must be >= 1");
    if (o.periods && *o.periods < 1) throw InvalidOption("--t must be >= 1");
    check_range(o.k0_range, "--k0-range");
    check_range(o.k_range, "--k-range");
    check_range(o.h_range, "--h-range");
  }

  DiscreteInstance discrete() {
    DiscreteInstance d;
    d.periods = o_.periods.value_or(1);
    d.joint_cost = draw(o_.k0_range);
    d.items = items();
    return d;
  }

  ContinuousInstance continuous() {
    ContinuousInstance c;
    c.joint_cost = draw(o_.k0_range);
    c.items = items();
    return c;
  }

 private:
  double draw(const std::pair<double, double>& r) {
    if (r.first == r.second) return r.first;
    if (o_.log_uniform)
      return std::exp(std::uniform_real_distribution<double>(std::log(r.first), std::log(r.second))(rng_));
    return std::uniform_real_distribution<double>(r.first, r.second)(rng_);
  }

  std::vector<Item> items() {
    std::vector<Item> v;
    for (int i = 0; i < o_.items; ++i) {
      Item it;
      it.ordering_cost = draw(o_.k_range);
      it.holding_rate = draw(o_.h_range);
      v.push_back(it);
    }
    return v;
  }

  GenOptions o_;
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Benchmarks

struct BenchRow {
  std::string id;
  std::size_t items = 0;
  std::optional<int> periods;
  double epsilon = 0.0;
  std::optional<double> oracle_cost;
  double solver_cost = 0.0;
  double lower_bound = 0.0;
  std::optional<double> power_of_two_cost;
  std::optional<double> oracle_ms;
  std::optional<double> solver_ms;

  double ratio() const { return solver_cost / oracle_cost.value_or(lower_bound); }
};

struct BenchOptions {
  std::string suite = "small";
  double epsilon = 0.5;
  int workers = 0;
  std::int64_t tp_override = 128;
  bool timings = true;
};

inline std::vector<std::string> bench_suites() { return {"small", "grid", "continuous"}; }

/// K0 once plus each item's best cost over the horizon without joint costs.
inline double discrete_lower_bound(const DiscreteInstance& inst) {
  double lb = inst.joint_cost;
  for (const auto& it : inst.items) lb += single_item_lower_bound(inst.periods, it.ordering_cost, it.holding_rate);
  return lb;
}

inline std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::vector<BenchRow> run_bench(const BenchOptions& o) {
  using Clock = std::chrono::steady_clock;
  auto ms_since = [](Clock::time_point t) { return std::chrono::duration<double, std::milli>(Clock::now() - t).count(); };
  const double eps = snap_epsilon(o.epsilon).value();
  std::vector<BenchRow> rows;
  auto id = [&](int i) {
    std::ostringstream s;
    s << o.suite << '-' << std::setw(3) << std::setfill('0') << i;
    return s.str();
  };
  if (o.suite == "small" || o.suite == "grid") {
    std::vector<DiscreteInstance> insts;
    if (o.suite == "small") {
      std::mt19937_64 shape(1000);
      for (int i = 0; i < 100; ++i) {
        GenOptions g;
        g.seed = 5000 + static_cast<std::uint64_t>(i);
        g.items = std::uniform_int_distribution<int>(1, 3)(shape);
        g.periods = std::uniform_int_distribution<int>(4, 16)(shape);
        insts.push_back(Generator(g).discrete());
      }
    } else {
      int i = 0;
      for (int n : {2, 4, 8})
        for (int T : {24, 48, 96})
          for (int rep = 0; rep < 2; ++rep) {
            GenOptions g;
            g.seed = 7000 + static_cast<std::uint64_t>(i++);
            g.items = n;
            g.periods = T;
            insts.push_back(Generator(g).discrete());
          }
    }
    for (std::size_t i = 0; i < insts.size(); ++i) {
      const auto& inst = insts[i];
      BenchRow r;
      r.id = id(static_cast<int>(i));
      r.items = inst.items.size();
      r.periods = inst.periods;
      r.epsilon = eps;
      r.lower_bound = discrete_lower_bound(inst);
      if (inst.periods <= 16) {
        const auto t = Clock::now();
        r.oracle_cost = solve_exact(inst, {20, o.workers}).cost.total;
        if (o.timings) r.oracle_ms = ms_since(t);
      }
      EptasOptions eo;
      eo.workers = o.workers;
      const auto t = Clock::now();
      r.solver_cost = solve_eptas(inst, eps, eo).cost.total;
      if (o.timings) r.solver_ms = ms_since(t);
      rows.push_back(std::move(r));
    }
    return rows;
  }
  if (o.suite == "continuous") {
    std::mt19937_64 shape(3000);
    for (int i = 0; i < 20; ++i) {
      GenOptions g;
      g.seed = 9000 + static_cast<std::uint64_t>(i);
      g.items = std::uniform_int_distribution<int>(1, 3)(shape);
      const auto inst = Generator(g).continuous();
      BenchRow r;
      r.id = id(i);
      r.items = inst.items.size();
      r.epsilon = eps;
      r.lower_bound = relaxation_lower_bound(inst).value;
      r.power_of_two_cost = power_of_two_policy(inst).avg_cost;
      ContinuousOptions co;
      co.eptas.workers = o.workers;
      co.tp_override = o.tp_override;
      const auto t = Clock::now();
      r.solver_cost = solve_continuous(inst, eps, co).avg_cost;
      if (o.timings) r.solver_ms = ms_since(t);
      rows.push_back(std::move(r));
    }
    return rows;
  }
  throw InvalidOption("unknown suite \"" + o.suite + "\" (expected small, grid or continuous)");
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  std::ostringstream s;
  s << "id,n,T,epsilon,oracle_cost,solver_cost,ratio,lower_bound,power_of_two_cost,oracle_ms,solver_ms\n";
  for (const auto& r : rows) {
    s << r.id << ',' << r.items << ',' << (r.periods ? std::to_string(*r.periods) : std::string()) << ','
      << format_number(r.epsilon) << ',' << opt(r.oracle_cost) << ',' << format_number(r.solver_cost) << ','
      << format_number(r.ratio()) << ',' << format_number(r.lower_bound) << ',' << opt(r.power_of_two_cost) << ','
      << opt(r.oracle_ms) << ',' << opt(r.solver_ms) << '\n';
  }
  return s.str();
}

// ---------------------------------------------------------------------------
// Command dispatch

namespace detail {

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidOption("cannot write " + path);
  f << text;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline DiscreteInstance load_discrete(const std::string& path) {
  auto f = parse_instance(read_file(path));
  if (!f.discrete) throw ParseError(path + ": expected a discrete instance");
  return std::move(f.discrete_instance);
}

inline ContinuousInstance load_continuous(const std::string& path) {
  auto f = parse_instance(read_file(path));
  if (f.discrete) throw ParseError(path + ": expected a continuous instance");
  return std::move(f.continuous_instance);
}

}  // namespace detail

/// Runs the jrp command line. Output goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint replenishment solvers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string input, output, nstar = "full", dist = "loguniform", suite;
  double epsilon = 0.5;
  int workers = 0, limit = 20, segment_cap = 20, lengths_thin = 1;
  std::optional<double> time_budget;
  std::optional<std::int64_t> tp_override;
  std::uint64_t easy_node_cap = 0;
  bool no_timings = false;
  GenOptions gen;
  std::optional<int> gen_t;
  bool gen_continuous = false;

  auto common = [&](CLI::App* c) {
    c->add_option("--workers", workers, "Worker threads (0: JRP_WORKERS or 1)");
    c->add_option("-o,--out", output, "Write the result here instead of stdout");
    c->add_flag("--no-timings", no_timings, "Leave wall-clock timings out of the output");
  };

  auto* sd = app.add_subcommand("solve-discrete", "Approximate a discrete instance");
  sd->add_option("-i,--input", input, "Instance file")->required();
  sd->add_option("-e,--epsilon", epsilon, "Accuracy; snapped down to 1/k")->capture_default_str();
  sd->add_option("--segment-cap,--tp-cap", segment_cap, "Most allowed points per zero-inventory segment")
      ->capture_default_str();
  sd->add_option("--nstar", nstar, "Joint order counts to guess: full or geometric")
      ->check(CLI::IsMember({"full", "geometric"}));
  sd->add_option("--time-budget", time_budget, "Seconds before the search stops at its best candidate");
  sd->add_option("--easy-node-cap", easy_node_cap, "Node cap per easy enumeration task (0: none)");
  common(sd);

  auto* ex = app.add_subcommand("exact", "Solve a small discrete instance exactly");
  ex->add_option("-i,--input", input, "Instance file")->required();
  ex->add_option("--limit", limit, "Largest horizon to enumerate")->capture_default_str();
  common(ex);

  auto* sc = app.add_subcommand("solve-continuous", "Approximate a continuous instance");
  sc->add_option("-i,--input", input, "Instance file")->required();
  sc->add_option("-e,--epsilon", epsilon, "Accuracy; snapped down to 1/k")->capture_default_str();
  sc->add_option("--tp-override", tp_override, "Cap on periods per discretized cycle");
  sc->add_option("--lengths-thin", lengths_thin, "Keep every k-th candidate cycle length")->capture_default_str();
  sc->add_option("--time-budget", time_budget, "Seconds per cycle length for the discrete search");
  common(sc);

  auto* gn = app.add_subcommand("gen", "Generate a random instance");
  gn->add_option("--n", gen.items, "Number of items")->required();
  auto* t_opt = gn->add_option("--t", gen_t, "Periods (discrete instance)");
  auto* c_opt = gn->add_flag("--continuous", gen_continuous, "Generate a continuous instance");
  t_opt->excludes(c_opt);
  gn->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gn->add_option("--k0-range", gen.k0_range, "Joint cost range lo hi");
  gn->add_option("--k-range", gen.k_range, "Item ordering cost range lo hi");
  gn->add_option("--h-range", gen.h_range, "Holding rate range lo hi");
  gn->add_option("--dist", dist, "loguniform or uniform")->check(CLI::IsMember({"loguniform", "uniform"}));
  gn->add_option("-o,--out", output, "Write the instance here instead of stdout");

  auto* bn = app.add_subcommand("bench", "Run a fixed benchmark suite and print CSV");
  bn->add_option("--suite", suite, "small, grid or continuous")->required();
  bn->add_option("-e,--epsilon", epsilon, "Accuracy; snapped down to 1/k")->capture_default_str();
  bn->add_option("--tp-override", tp_override, "Periods per cycle for the continuous suite (default 128)");
  common(bn);

  auto* vf = app.add_subcommand("verify", "Re-evaluate the policy stored in a result file");
  vf->add_option("-i,--input", input, "Result file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kOptions;
  }

  try {
    if (*sd) {
      const auto inst = detail::load_discrete(input);
      EptasOptions o;
      o.workers = workers;
      o.segment_point_cap = segment_cap;
      o.time_budget_s = time_budget;
      o.easy_node_cap = easy_node_cap;
      o.n_star_strategy = nstar == "geometric" ? NStarStrategy::geometric : NStarStrategy::full;
      const auto r = solve_eptas(inst, epsilon, o);
      detail::emit(detail::dump(result_json(inst, r, !no_timings)), output, out);
    } else if (*ex) {
      const auto inst = detail::load_discrete(input);
      const auto t = std::chrono::steady_clock::now();
      const auto s = solve_exact(inst, {limit, workers});
      std::optional<double> ms;
      if (!no_timings) ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t).count();
      detail::emit(detail::dump(result_json(inst, s, ms)), output, out);
    } else if (*sc) {
      const auto inst = detail::load_continuous(input);
      ContinuousOptions o;
      o.eptas.workers = workers;
      o.eptas.time_budget_s = time_budget;
      o.tp_override = tp_override;
      o.lengths_thin = lengths_thin;
      const auto r = solve_continuous(inst, epsilon, o);
      const Json j = result_json(inst, r, !no_timings);
      err << "relaxation lower bound " << format_number(j["baselines"]["relaxation_lower_bound"].get<double>())
          << ", power-of-two policy " << format_number(j["baselines"]["power_of_two"].get<double>()) << "\n";
      detail::emit(detail::dump(j), output, out);
    } else if (*gn) {
      gen.periods = gen_t;
      gen.log_uniform = dist == "loguniform";
      if (!gen_t && !gen_continuous) throw InvalidOption("gen needs --t or --continuous");
      Generator g(gen);
      const Json j = gen_continuous ? to_json(g.continuous()) : to_json(g.discrete());
      detail::emit(detail::dump(j), output, out);
    } else if (*bn) {
      BenchOptions o;
      o.suite = suite;
      o.epsilon = epsilon;
      o.workers = workers;
      o.tp_override = tp_override.value_or(128);
      o.timings = !no_timings;
      detail::emit(bench_csv(run_bench(o)), output, out);
    } else if (*vf) {
      const auto v = verify_result(read_file(input));
      if (!v.ok) {
        err << "mismatch: stored cost " << format_number(v.embedded) << ", recomputed "
            << format_number(v.recomputed) << "\n";
        return kFailure;
      }
      out << "ok " << format_number(v.recomputed) << "\n";
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParse;
  } catch (const InvalidPolicy& e) {
    err << "error: " << e.what() << "\n";
    return kParse;
  } catch (const BudgetExpired& e) {
    err << "error: " << e.what() << "\n";
    return kBudget;
  } catch (const InvalidOption& e) {
    err << "error: " << e.what() << "\n";
    return kOptions;
  } catch (const LimitExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kOptions;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kOptions;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace jrp::cli
