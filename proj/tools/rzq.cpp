// rzq: command line front end for simulations, peakon runs and experiments.
//
// Exit status: 0 success, 1 usage or configuration error, 2 a verdict failed,
// 3 blow-up signal.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <rzq/rzq.hpp>

#include "run_config.hpp"

namespace fs = std::filesystem;
using rzq::cli::KeySpec;
using rzq::cli::RunConfig;
using rzq::cli::UsageError;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_verdict = 2;
constexpr int exit_blowup = 3;

const std::string two_pi = "6.283185307179586";

const std::vector<KeySpec> simulate_keys{
    {"profile", "cosine", "initial datum: zero, cosine, random, peakon"},
    {"amp", "0.1", "amplitude (cosine, peakon speed) or H^s size (random)"},
    {"s", "4", "Sobolev index of the norm diagnostic"},
    {"grid-n", "256", "grid points (power of two)"},
    {"box-length", two_pi, "box length L"},
    {"dt", "0.001", "time step"},
    {"t-end", "1", "final time"},
    {"snapshot-stride", "100", "steps between snapshots"},
    {"rhs", "nonlocal", "right-hand side: nonlocal, m_form, burgers_equiv, mollified"},
    {"eps", "1", "mollifier epsilon (rhs = mollified)"},
    {"blowup-factor", "1e6", "blow-up signal once the H^s norm grows by this factor"},
    {"seed", "1", "seed of the random profile"}};

const std::vector<KeySpec> peakon_keys{
    {"preset", "two", "ensemble preset: single, two, custom (ignored when p and q are given)"},
    {"p", "", "comma separated momenta"},
    {"q", "", "comma separated positions"},
    {"dt", "0.001", "nominal time step"},
    {"t-end", "10", "final time"},
    {"snapshot-stride", "100", "steps between snapshots"},
    {"tol", "1e-8", "conservation tolerance on H and P"}};

// Every experiment key with its default; each experiment accepts a subset.
const std::vector<KeySpec> experiment_keys{
    {"s", "4", "Sobolev index s"},
    {"sigma", "", "sigma (a comma list for residual-scaling); empty = experiment default"},
    {"delta", "0.5", "envelope exponent delta"},
    {"omega", "1", "sign of the low-frequency datum"},
    {"n-list", "", "frequencies n; empty = experiment default"},
    {"eps-list", "1,0.5,0.25,0.125", "mollifier epsilons"},
    {"etas", "0.001,0.0001", "perturbation sizes"},
    {"t", "", "evaluation time; empty = experiment default"},
    {"t-samples", "0,0.7853981633974483,1.5707963267948966", "sample times"},
    {"dt", "", "time step; empty = experiment default"},
    {"t-end", "", "final time; empty = experiment default"},
    {"grid-n", "", "grid points; empty = experiment default"},
    {"amp", "", "datum amplitude; empty = experiment default"},
    {"s-list", "3,3.4,3.5,3.6,4", "Sobolev indices scanned"},
    {"r-list", "100,1000,10000,100000,1000000,10000000,100000000", "truncation radii"},
    {"samples", "500", "corpus size per lemma and grid"},
    {"grid-sizes", "128,256", "grids for the refinement check"},
    {"seed", "1", "corpus seed"},
    {"slope-tol", "0.3", "slope tolerance"}};

const std::map<std::string, std::set<std::string>> experiment_accepts{
    {"residual-scaling", {"s", "sigma", "n-list", "t", "grid-n", "slope-tol"}},
    {"nonuniform-periodic", {"s", "sigma", "n-list", "t-samples", "dt", "grid-n"}},
    {"nonuniform-realline", {"s", "sigma", "delta", "omega", "n-list", "t", "dt", "slope-tol"}},
    {"mollifier", {"s", "eps-list", "dt", "t-end", "grid-n", "amp"}},
    {"continuous-dependence", {"s", "sigma", "etas", "dt", "t-end", "grid-n", "amp"}},
    {"illposed", {"s-list", "r-list"}},
    {"lemmas", {"seed", "samples", "grid-sizes"}}};

std::string experiment_names() {
  std::string out;
  for (const auto& [k, v] : experiment_accepts) out += (out.empty() ? "" : ", ") + k;
  return out;
}

// ---------------------------------------------------------------------------
// Output helpers

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw UsageError("cannot write '" + p.string() + "'");
  return os;
}

nlohmann::ordered_json metadata(const std::string& command, const RunConfig& cfg, unsigned workers) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["code_version"] = rzq::code_version;
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.entries()) c[k] = v;
  j["config"] = c;
  j["workers"] = workers;
  std::string rerun = "rzq " + command;
  for (const auto& [k, v] : cfg.entries())
    if (!v.empty()) rerun += " --" + k + " " + v;
  j["rerun"] = rerun;
  return j;
}

void write_json(const fs::path& p, const nlohmann::ordered_json& j) { open_out(p) << j.dump(2) << '\n'; }

// Plot scripts read the CSV next to them; matplotlib is only needed to run them.
void write_plot_script(const fs::path& p, const std::string& csv, const std::string& x, const std::string& title,
                       bool loglog) {
  auto os = open_out(p);
  os << "import csv\nimport math\nimport matplotlib.pyplot as plt\n\n"
     << "rows = list(csv.DictReader(open('" << csv << "')))\n"
     << "def num(v):\n    try:\n        return float(v)\n    except ValueError:\n        return math.nan\n\n"
     << "skip = {'" << x << "', 'parameter', 'value', 'divergent'}\n"
     << "cols = [c for c in rows[0].keys() if c not in skip] if rows else []\n"
     << "xs = [num(r['" << x << "']) for r in rows]\n"
     << "fig, ax = plt.subplots()\n"
     << "for c in cols:\n"
     << "    ys = [abs(num(r[c])) for r in rows]\n"
     << "    if any(y > 0 for y in ys):\n"
     << "        ax.plot(xs, ys, marker='o', label=c)\n";
  if (loglog) os << "ax.set_xscale('log')\nax.set_yscale('log')\n";
  os << "ax.set_xlabel('" << x << "')\nax.set_title('" << title << "')\n"
     << "ax.legend(fontsize='small')\nfig.savefig('" << fs::path(csv).stem().string() << ".png', dpi=150)\n";
}

// ---------------------------------------------------------------------------
// simulate

rzq::RhsForm parse_rhs(const RunConfig& cfg) {
  const std::string& r = cfg.text("rhs");
  if (r == "nonlocal") return rzq::RhsForm::nonlocal();
  if (r == "m_form") return rzq::RhsForm::m_form();
  if (r == "burgers_equiv") return rzq::RhsForm::burgers_equiv();
  if (r == "mollified") return rzq::RhsForm::mollified(cfg.number("eps"));
  throw UsageError("config key 'rhs': unknown form '" + r + "' (nonlocal, m_form, burgers_equiv, mollified)");
}

rzq::PeriodicField initial_datum(const RunConfig& cfg, const rzq::Grid& g) {
  const std::string& p = cfg.text("profile");
  const double amp = cfg.number("amp");
  if (p == "zero") return rzq::PeriodicField::zeros(g);
  if (p == "cosine") {
    const double k = 2.0 * std::numbers::pi / g.length();
    return rzq::PeriodicField::sample(g, [=](double x) { return amp * std::cos(k * x); });
  }
  if (p == "random") {
    const auto f = rzq::random_field(g, 6.0, static_cast<std::uint64_t>(cfg.integer("seed")), g.size() / 8, true);
    return (amp / rzq::sobolev_norm(f, cfg.number("s"))) * f;
  }
  if (p == "peakon") return rzq::ensemble_to_field({{amp}, {0.0}}, g).field;
  throw UsageError("config key 'profile': unknown profile '" + p + "' (zero, cosine, random, peakon)");
}

int cmd_simulate(const RunConfig& cfg, const fs::path& out) {
  const long n = cfg.integer("grid-n");
  if (n <= 0) throw UsageError("config key 'grid-n' must be positive");
  const rzq::Grid g(static_cast<std::size_t>(n), cfg.number("box-length"));
  rzq::EvolutionConfig ec;
  ec.grid = g;
  ec.dt = cfg.number("dt");
  ec.t_end = cfg.number("t-end");
  ec.norm_index = cfg.number("s");
  ec.blowup_factor = cfg.number("blowup-factor");
  const long stride = cfg.integer("snapshot-stride");
  if (stride <= 0) throw UsageError("config key 'snapshot-stride' must be positive");
  ec.snapshot_stride = static_cast<std::size_t>(stride);
  ec.rhs = parse_rhs(cfg);
  const rzq::PeriodicField u0 = initial_datum(cfg, g);
  rzq::validate(ec, u0);

  ensure_dir(out);
  const rzq::Trajectory traj = rzq::evolve(u0, ec);
  {
    auto os = open_out(out / "trajectory.csv");
    os << "t,x,u\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const auto v = traj.states[k].values();
      for (std::size_t i = 0; i < v.size(); ++i) {
        os << rzq::detail::format_double(traj.times[k]) << ',' << rzq::detail::format_double(g.node(i)) << ','
           << rzq::detail::format_double(v[i]) << '\n';
      }
    }
  }
  {
    auto os = open_out(out / "diagnostics.csv");
    rzq::write_trajectory_csv(os, traj, ec.norm_index);
  }
  double max_ratio = 0.0;
  const double n0 = traj.hs_norm.front();
  for (double h : traj.hs_norm) max_ratio = std::max(max_ratio, n0 > 0.0 ? h / n0 : (h > 0.0 ? INFINITY : 1.0));

  auto meta = metadata("simulate", cfg, 1);
  meta["stability_ceiling"] = rzq::stability_ceiling(u0);
  meta["max_norm_ratio"] = rzq::detail::number_or_tag(max_ratio);
  meta["resolution_warning"] = traj.resolution_warning;
  meta["blowup"] = traj.blowup ? nlohmann::ordered_json{{"time", traj.blowup->time}, {"reason", traj.blowup->reason}}
                               : nlohmann::ordered_json(nullptr);
  write_json(out / "metadata.json", meta);
  write_plot_script(out / "plot_diagnostics.py", "diagnostics.csv", "t", "simulate diagnostics", false);

  std::printf("simulate: %zu snapshots, max ||u(t)||/||u0|| in H^%s = %s%s\n", traj.times.size(),
              cfg.text("s").c_str(), rzq::detail::format_double(max_ratio).c_str(),
              traj.resolution_warning ? " (resolution warning)" : "");
  if (traj.blowup) {
    std::printf("blow-up signal at t = %s: %s\n", rzq::detail::format_double(traj.blowup->time).c_str(),
                traj.blowup->reason.c_str());
    return exit_blowup;
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// peakons

int cmd_peakons(const RunConfig& cfg, const fs::path& out) {
  rzq::PeakonEnsemble e;
  e.p = cfg.numbers("p");
  e.q = cfg.numbers("q");
  if (e.p.empty() && e.q.empty()) {
    const std::string& preset = cfg.text("preset");
    if (preset == "single") e = {{1.0}, {0.0}};
    else if (preset == "two") e = {{2.0, 1.0}, {-5.0, 0.0}};
    else if (preset != "custom") throw UsageError("config key 'preset': unknown preset '" + preset + "' (single, two, custom)");
  }
  if (e.size() == 0) throw UsageError("empty peakon ensemble: give p and q, or a preset");
  if (e.p.size() != e.q.size()) throw UsageError("p and q must have the same length");
  const long stride = cfg.integer("snapshot-stride");
  if (stride <= 0) throw UsageError("config key 'snapshot-stride' must be positive");
  const auto traj = rzq::evolve_peakons(e, cfg.number("dt"), cfg.number("t-end"), static_cast<std::size_t>(stride));

  ensure_dir(out);
  {
    auto os = open_out(out / "trajectory.csv");
    rzq::write_peakon_csv(os, traj);
  }
  const double tol = cfg.number("tol");
  const auto& first = traj.snapshots.front();
  double dh = 0.0, dp = 0.0;
  bool collision = false;
  for (const auto& s : traj.snapshots) {
    dh = std::max(dh, std::abs(s.H - first.H));
    dp = std::max(dp, std::abs(s.P - first.P));
    collision = collision || s.near_collision;
  }
  rzq::ExperimentReport rep;
  rep.add_verdict("H_conserved", dh <= tol * std::max(1.0, std::abs(first.H)), dh,
                  "<= " + rzq::detail::format_double(tol) + " max(1, |H(0)|)");
  rep.add_verdict("P_conserved", dp <= tol, dp, "<= " + rzq::detail::format_double(tol));

  auto meta = metadata("peakons", cfg, 1);
  meta["halvings"] = traj.halvings;
  meta["near_collision"] = collision;
  nlohmann::ordered_json v = nlohmann::ordered_json::object();
  for (const auto& x : rep.verdicts) v[x.name] = {{"pass", x.pass}, {"measured", x.measured}, {"threshold", x.threshold}};
  meta["verdicts"] = v;
  write_json(out / "metadata.json", meta);
  {
    auto os = open_out(out / "plot_trajectory.py");
    os << "import csv\nimport matplotlib.pyplot as plt\n\n"
       << "rows = list(csv.DictReader(open('trajectory.csv')))\n"
       << "t = [float(r['t']) for r in rows]\n"
       << "fig, ax = plt.subplots()\n"
       << "for c in rows[0].keys():\n"
       << "    if c.startswith('q_'):\n"
       << "        ax.plot(t, [float(r[c]) for r in rows], label=c)\n"
       << "ax.set_xlabel('t')\nax.set_ylabel('position')\nax.legend()\nfig.savefig('trajectory.png', dpi=150)\n";
  }
  rzq::write_verdict_summary(std::cout, rep);
  return rep.all_pass() ? exit_ok : exit_verdict;
}

// ---------------------------------------------------------------------------
// experiment

std::vector<std::size_t> sizes(const std::vector<long>& xs, const std::string& key) {
  std::vector<std::size_t> out;
  for (long x : xs) {
    if (x <= 0) throw UsageError("config key '" + key + "' needs positive entries");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

int cmd_experiment(const std::string& name, const RunConfig& cfg, const std::set<std::string>& given,
                   unsigned workers, const fs::path& out) {
  auto it = experiment_accepts.find(name);
  if (it == experiment_accepts.end()) {
    throw UsageError("unknown experiment '" + name + "'; valid names: " + experiment_names());
  }
  for (const auto& k : given)
    if (!it->second.count(k)) throw UsageError("config key '" + k + "' does not apply to experiment " + name);
  auto has = [&](const std::string& k) { return !cfg.text(k).empty(); };

  rzq::ExperimentReport rep;
  std::vector<std::pair<std::string, std::vector<rzq::InequalityRecord>>> batches;
  if (name == "residual-scaling") {
    rzq::ResidualScalingConfig c;
    c.s = cfg.number("s");
    if (has("sigma")) c.sigma_list = cfg.numbers("sigma");
    if (has("n-list")) c.n_list = cfg.integers("n-list");
    if (has("t")) c.t = cfg.number("t");
    if (has("grid-n")) c.min_grid_n = static_cast<std::size_t>(cfg.integer("grid-n"));
    c.slope_tol = cfg.number("slope-tol");
    c.workers = workers;
    rep = rzq::residual_scaling_report(c);
  } else if (name == "nonuniform-periodic") {
    rzq::NonuniformConfig c;
    c.s = cfg.number("s");
    if (has("sigma")) c.sigma = cfg.number("sigma");
    if (has("n-list")) c.n_list = cfg.integers("n-list");
    c.t_samples = cfg.numbers("t-samples");
    if (has("dt")) c.dt = cfg.number("dt");
    if (has("grid-n")) c.grid_n = static_cast<std::size_t>(cfg.integer("grid-n"));
    c.workers = workers;
    rep = rzq::nonuniform_dependence_periodic(c);
  } else if (name == "nonuniform-realline") {
    rzq::RealLineConfig c;
    c.s = cfg.number("s");
    if (has("sigma")) c.sigma = cfg.number("sigma");
    c.delta = cfg.number("delta");
    c.omega = cfg.number("omega");
    if (has("n-list")) c.n_list = cfg.integers("n-list");
    if (has("t")) c.t = cfg.number("t");
    if (has("dt")) c.dt = cfg.number("dt");
    c.slope_tol = cfg.number("slope-tol");
    c.workers = workers;
    rep = rzq::nonuniform_realline(c);
  } else if (name == "mollifier") {
    rzq::MollifierStudyConfig c;
    c.s = cfg.number("s");
    c.eps_list = cfg.numbers("eps-list");
    if (has("dt")) c.dt = cfg.number("dt");
    if (has("t-end")) c.t_end = cfg.number("t-end");
    c.workers = workers;
    const long n = has("grid-n") ? cfg.integer("grid-n") : 128;
    const double amp = has("amp") ? cfg.number("amp") : 0.05;
    rep = rzq::mollified_convergence_study(rzq::rough_tail_field(rzq::Grid(static_cast<std::size_t>(n)), c.s, amp), c);
  } else if (name == "continuous-dependence") {
    rzq::ContinuousDependenceConfig c;
    c.s = cfg.number("s");
    if (has("sigma")) c.sigma = cfg.number("sigma");
    c.etas = cfg.numbers("etas");
    if (has("dt")) c.dt = cfg.number("dt");
    if (has("t-end")) c.t_end = cfg.number("t-end");
    c.workers = workers;
    const long n = has("grid-n") ? cfg.integer("grid-n") : 256;
    const double amp = has("amp") ? cfg.number("amp") : 0.1;
    const rzq::Grid g(static_cast<std::size_t>(n));
    const auto u0 = rzq::PeriodicField::sample(g, [amp](double x) { return amp * std::cos(x) + amp / 3 * std::sin(2 * x); });
    rep = rzq::continuous_dependence_study(u0, u0, c);
  } else if (name == "illposed") {
    rzq::IllposednessConfig c;
    c.s_list = cfg.numbers("s-list");
    c.r_list = cfg.numbers("r-list");
    rep = rzq::illposedness_scan(c);
  } else if (name == "lemmas") {
    rzq::LemmasConfig c;
    c.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    const long samples = cfg.integer("samples");
    if (samples <= 0) throw UsageError("config key 'samples' must be positive");
    c.samples = static_cast<std::size_t>(samples);
    c.grid_sizes = sizes(cfg.integers("grid-sizes"), "grid-sizes");
    c.workers = workers;
    auto o = rzq::run_lemmas(c);
    rep = std::move(o.report);
    batches = std::move(o.batches);
  }

  ensure_dir(out);
  {
    auto os = open_out(out / "report.csv");
    rzq::write_report_csv(os, rep);
  }
  {
    auto os = open_out(out / "report.json");
    rzq::write_report_json(os, rep);
  }
  for (const auto& [label, recs] : batches) {
    auto os = open_out(out / (label + ".csv"));
    rzq::write_inequality_csv(os, recs);
  }
  nlohmann::ordered_json meta = metadata("experiment " + name, cfg, workers);
  nlohmann::ordered_json accepted = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.entries())
    if (it->second.count(k)) accepted[k] = v;
  meta["config"] = accepted;
  std::string rerun = "rzq experiment " + name;
  for (const auto& [k, v] : cfg.entries())
    if (it->second.count(k) && !v.empty()) rerun += " --" + k + " " + v;
  meta["rerun"] = rerun;
  meta["all_pass"] = rep.all_pass();
  write_json(out / "metadata.json", meta);
  const bool loglog = name != "illposed" && name != "lemmas";
  write_plot_script(out / "plot_report.py", "report.csv", "value", name, loglog);

  rzq::write_verdict_summary(std::cout, rep);
  for (const auto& r : rep.records)
    if (r.divergent) std::printf("note: %s = %s divergent: %s\n", r.parameter.c_str(),
                                 rzq::detail::format_double(r.value).c_str(), r.note.c_str());
  return rep.all_pass() ? exit_ok : exit_verdict;
}

// ---------------------------------------------------------------------------

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> flags;  // key -> flag value
  std::map<std::string, CLI::Option*> options;
};

void add_keys(Subcommand& sc, const std::vector<KeySpec>& keys) {
  for (const auto& k : keys) {
    sc.options[k.key] = sc.app->add_option("--" + k.key, sc.flags[k.key], k.help + " [default: " +
                                                                              (k.fallback.empty() ? "-" : k.fallback) + "]");
  }
}

RunConfig resolve(const std::vector<KeySpec>& keys, const std::string& config_path, const Subcommand& sc,
                  std::set<std::string>* given) {
  RunConfig cfg(keys);
  if (!config_path.empty()) {
    RunConfig file(keys);
    file.load_file(config_path);
    const RunConfig defaults(keys);
    for (const auto& [k, v] : file.entries()) {
      if (v != defaults.text(k) && given) given->insert(k);
      cfg.set(k, v);
    }
  }
  for (const auto& [k, opt] : sc.options) {
    if (opt->count() > 0) {
      cfg.set(k, sc.flags.at(k));
      if (given) given->insert(k);
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rzq: spectral simulations and experiments for m_t + v m_x + 2 v_x m = 0"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "rzq_out";
  unsigned workers = rzq::default_workers();

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value file; flags override it");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker threads (results do not depend on it)");
  };

  Subcommand sim{app.add_subcommand("simulate", "evolve one initial datum")};
  common(sim.app);
  add_keys(sim, simulate_keys);

  Subcommand pk{app.add_subcommand("peakons", "integrate the N-peakon system")};
  common(pk.app);
  add_keys(pk, peakon_keys);

  Subcommand ex{app.add_subcommand("experiment", "run a named experiment: " + experiment_names())};
  common(ex.app);
  std::string experiment_name;
  ex.app->add_option("name", experiment_name, "experiment name")->required();
  add_keys(ex, experiment_keys);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (workers == 0) throw UsageError("--workers must be positive");
    if (sim.app->parsed()) return cmd_simulate(resolve(simulate_keys, config_path, sim, nullptr), out_dir);
    if (pk.app->parsed()) return cmd_peakons(resolve(peakon_keys, config_path, pk, nullptr), out_dir);
    std::set<std::string> given;
    const RunConfig cfg = resolve(experiment_keys, config_path, ex, &given);
    return cmd_experiment(experiment_name, cfg, given, workers, out_dir);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return exit_usage;
  } catch (const rzq::StabilityError& e) {
    std::fprintf(stderr, "usage error: config key 'dt': %s\n", e.what());
    return exit_usage;
  } catch (const rzq::BlowUpError& e) {
    std::fprintf(stderr, "blow-up signal: %s\n", e.what());
    return exit_blowup;
  } catch (const rzq::Error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return exit_usage;
  }
}
