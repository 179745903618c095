// Command-line front end: sanitize snapshots, infer relationships, sweep
// alpha, rank ASes, compute cones, generate synthetic truth and score.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asrel/asrel.hpp"

namespace fs = std::filesystem;
using namespace asrel;

namespace {

// Config files hold plain key=value lines; keys outside a section belong to
// the subcommand being run. CLI11 reads config only on the root app.
class SubcommandConfig : public CLI::ConfigBase {
 public:
  explicit SubcommandConfig(const CLI::App& app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigBase::from_config(input);
    const auto subs = app_.get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items)
      if (item.parents.empty() && item.name != "++" && item.name != "--") item.parents.push_back(subs.front()->get_name());
    return items;
  }

 private:
  const CLI::App& app_;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Directories expand to their regular files in name order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    if (fs::is_directory(a)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(a))
        if (entry.is_regular_file()) files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.emplace_back(a);
    }
  }
  if (out.empty()) throw InputError("no snapshot files given");
  return out;
}

std::vector<Snapshot> load_snapshots(const std::vector<std::string>& args) {
  std::vector<Snapshot> snaps;
  for (const auto& f : expand_inputs(args)) {
    try {
      snaps.push_back(load_snapshot(f));
    } catch (const ParseError& e) {
      throw InputError(f.string() + ":" + std::to_string(e.line()) + ": " + e.what());
    }
  }
  return snaps;
}

void with_output(const std::string& file, const std::function<void(std::ostream&)>& fn) {
  if (file.empty() || file == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write " + file);
  fn(out);
  if (!out) throw InputError("write failed for " + file);
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

// Shared by infer, sweep and calibrate.
struct PathInputs {
  std::vector<std::string> paths;
  std::size_t min_persistency = 0;
  std::string orgs;
  std::string synonyms;
};

void add_path_inputs(CLI::App* cmd, PathInputs& in) {
  cmd->add_option("--paths", in.paths, "Path files or directories; several are reduced to their stable set")
      ->required();
  cmd->add_option("--min-persistency", in.min_persistency, "Snapshots a path must appear in (0 = all)");
  cmd->add_option("--orgs", in.orgs, "ASN|OrgName registrations");
  cmd->add_option("--synonyms", in.synonyms, "Organization name synonyms, one class per line");
}

struct LoadedInputs {
  std::set<AsPath> paths;
  OrgRecords orgs;
  SynonymDict dict;
};

LoadedInputs load_inputs(const PathInputs& in) {
  LoadedInputs out;
  auto snaps = load_snapshots(in.paths);
  out.paths = snaps.size() == 1 ? snaps.front().paths : stable_paths(snaps, in.min_persistency).paths;
  try {
    if (!in.orgs.empty())
      out.orgs = load_org_records(in.orgs);
    else
      std::cerr << "warning: no organization records; no s2s links will be inferred\n";
    if (!in.synonyms.empty()) out.dict = load_synonyms(in.synonyms);
  } catch (const ParseError& e) {
    throw InputError(std::string(e.what()) + " (line " + std::to_string(e.line()) + ")");
  }
  return out;
}

struct SolverFlags {
  std::uint64_t seed = 1;
  std::size_t restarts = 32;
  unsigned threads = 1;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--restarts", f.restarts, "Local search restarts")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
}

SolverOptions solver_options(const SolverFlags& f) {
  SolverOptions o;
  o.seed = f.seed;
  o.restarts = f.restarts;
  o.threads = f.threads;
  return o;
}

MwisOptions mwis_options(const SolverFlags& f) {
  MwisOptions o;
  o.seed = f.seed;
  o.threads = f.threads;
  return o;
}

void warn_degenerate_threshold(const P2pResult& p2p, bool overridden) {
  if (!overridden && p2p.w_e == 0.0 && p2p.candidates > 0)
    std::cerr << "warning: default p2p threshold g(3,545) is 0 on this graph, so every candidate is kept; "
                 "consider --w-e or the calibrate command\n";
}

// --- sanitize --------------------------------------------------------------

struct SanitizeArgs {
  std::vector<std::string> paths;
  std::size_t min_persistency = 0;
  std::string out, persistency_csv, valleys_csv;
  std::vector<std::size_t> margins{5, 10, 15, 20};
  std::size_t sample_size = 10000, trials = 100;
  SolverFlags run;
};

int run_sanitize(const SanitizeArgs& a) {
  auto snaps = load_snapshots(a.paths);
  const auto stable = stable_paths(snaps, a.min_persistency);
  const auto unstable = unstable_paths(snaps, a.min_persistency);
  with_output(a.out, [&](std::ostream& o) { write_paths(o, stable.paths); });

  if (!a.persistency_csv.empty())
    with_output(a.persistency_csv, [&](std::ostream& o) {
      o << "persistency,paths\n";
      for (const auto& [k, n] : persistency_distribution(persistency(snaps))) o << k << ',' << n << '\n';
    });

  if (!a.valleys_csv.empty()) {
    std::set<AsPath> all;
    for (const auto& s : snaps) all.insert(s.paths.begin(), s.paths.end());
    const auto degrees = build_graph(all).degree;
    // 0 samples equal-size subsets so the two sets stay comparable.
    std::size_t sample = a.sample_size;
    if (sample == 0) sample = std::min(stable.paths.size(), unstable.size());
    with_output(a.valleys_csv, [&](std::ostream& o) {
      o << "w,set,paths,sample,unique,total\n";
      for (auto w : a.margins) {
        for (const auto& [name, set] : {std::pair{"stable", &stable.paths}, std::pair{"unstable", &unstable}}) {
          const auto c = degree_valley_count(*set, degrees, w, sample, a.trials, a.run.seed, a.run.threads);
          o << w << ',' << name << ',' << set->size() << ',' << std::min(sample, set->size()) << ','
            << fixed(c.unique, 2) << ',' << fixed(c.total, 2) << '\n';
        }
      }
    });
  }
  std::cerr << "snapshots=" << snaps.size() << " stable=" << stable.paths.size() << " unstable=" << unstable.size()
            << '\n';
  return 0;
}

// --- infer -----------------------------------------------------------------

struct InferArgs {
  PathInputs in;
  double alpha = 0.01;
  std::optional<double> w_e;
  bool exact = false;
  std::string out;
  SolverFlags run;
};

int run_infer(const InferArgs& a) {
  const auto in = load_inputs(a.in);
  InferenceOptions opt;
  opt.alpha = a.alpha;
  opt.w_e = a.w_e;
  opt.exact = a.exact;
  opt.solver = solver_options(a.run);
  opt.mwis = mwis_options(a.run);
  const auto r = infer_relationships(in.paths, in.orgs, in.dict, opt);
  warn_degenerate_threshold(r.p2p, a.w_e.has_value());
  const std::vector<std::string> header{
      "alpha=" + fixed(a.alpha, 6),
      "w_e=" + fixed(r.p2p.w_e, 6),
      "seed=" + std::to_string(a.run.seed),
      "restarts=" + std::to_string(a.run.restarts),
      "paths=" + std::to_string(in.paths.size()),
      "invalid_fraction=" + fixed(r.c2p.invalid_fraction, 6),
  };
  with_output(a.out, [&](std::ostream& o) { write_as_rel(o, r.topology, header); });
  std::cerr << format_summary(summarize(r.topology)) << '\n';
  return 0;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  PathInputs in;
  std::vector<double> grid{0.0, 0.01, 0.05, 0.1, 0.5, 1.0};
  std::vector<Asn> expected_top;
  std::size_t top_window = 5;
  std::string out;
  SolverFlags run;
};

int run_sweep(const SweepArgs& a) {
  const auto in = load_inputs(a.in);
  const auto prepared = prepare(in.paths, in.orgs, in.dict);
  std::vector<std::pair<double, HierarchyReport>> sweep;
  for (double alpha : a.grid) {
    const auto c = infer_c2p(prepared, alpha, solver_options(a.run));
    sweep.emplace_back(alpha, hierarchy(c.contracted, prepared.nodes(), c.invalid_fraction));
  }
  // Without a list of expected top ASes, every entry qualifies and the
  // smallest invalid fraction wins.
  std::set<Asn> expected(a.expected_top.begin(), a.expected_top.end());
  if (expected.empty()) expected = prepared.nodes();
  if (expected.empty()) throw InputError("no paths to sweep over");
  const auto choice = select_alpha(sweep, expected, a.top_window);

  with_output(a.out, [&](std::ostream& o) {
    o << "alpha,invalid_pct,asn,reach,depth,width\n";
    for (const auto& [alpha, r] : sweep)
      for (Asn v : r.top(a.top_window))
        o << fixed(alpha, 4) << ',' << fixed(100.0 * r.invalid_fraction, 4) << ',' << v << ',' << r.reach.at(v) << ','
          << r.depth.at(v) << ',' << r.width.at(v) << '\n';
  });
  std::cout << "chosen alpha=" << fixed(choice.alpha, 4) << (choice.degraded ? " (no run kept only expected ASes on top)" : "")
            << '\n';
  return 0;
}

// --- calibrate -------------------------------------------------------------

struct CalibrateArgs {
  PathInputs in;
  std::string truth;
  double alpha = 0.01;
  std::vector<double> grid;
  std::string out;
  SolverFlags run;
};

int run_calibrate(const CalibrateArgs& a) {
  const auto in = load_inputs(a.in);
  const auto truth = load_as_rel(a.truth);
  const auto prepared = prepare(in.paths, in.orgs, in.dict);
  const auto c2p = infer_c2p(prepared, a.alpha, solver_options(a.run));
  auto grid = a.grid;
  if (grid.empty())
    for (int i = 0; i <= 20; ++i) grid.push_back(0.05 * i);
  const auto cal = calibrate_threshold({{&prepared, &c2p, &truth}}, grid, mwis_options(a.run));
  with_output(a.out, [&](std::ostream& o) {
    o << "w_e,mislabeled\n";
    for (const auto& [w, n] : cal.errors) o << fixed(w, 4) << ',' << n << '\n';
  });
  std::cout << "chosen w_e=" << fixed(cal.w_e, 4) << '\n';
  return 0;
}

// --- rank / cone -----------------------------------------------------------

Orientation c2p_orientation(const AnnotatedTopology& t) {
  Orientation o;
  for (const auto& [e, l] : t.labels)
    if (l.kind == RelKind::C2P) o.emplace(e, l.provider);
  return o;
}

AnnotatedTopology load_topology(const std::string& file) {
  try {
    return load_as_rel(file);
  } catch (const ParseError& e) {
    throw InputError(file + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

int run_rank(const std::string& as_rel, const std::string& out) {
  const auto t = load_topology(as_rel);
  const auto r = hierarchy(c2p_orientation(t), t.graph.vertices, 0.0);
  std::vector<Asn> order(t.graph.vertices.begin(), t.graph.vertices.end());
  std::stable_sort(order.begin(), order.end(), [&](Asn x, Asn y) { return r.depth.at(x) < r.depth.at(y); });
  with_output(out, [&](std::ostream& o) {
    o << "asn,reach,level,depth,width\n";
    for (Asn v : order)
      o << v << ',' << r.reach.at(v) << ',' << r.level.at(v) << ',' << r.depth.at(v) << ',' << r.width.at(v) << '\n';
  });
  return 0;
}

int run_cone(const std::string& as_rel, const std::string& prefixes, std::vector<Asn> asns, const std::string& out) {
  const auto t = load_topology(as_rel);
  PrefixMap pfx;
  try {
    if (!prefixes.empty()) pfx = load_prefix_map(prefixes);
  } catch (const ParseError& e) {
    throw InputError(prefixes + ":" + std::to_string(e.line()) + ": " + e.what());
  }
  if (asns.empty()) asns.assign(t.graph.vertices.begin(), t.graph.vertices.end());
  for (Asn a : asns)
    if (!t.graph.vertices.count(a)) throw InputError("AS " + std::to_string(a) + " is not in the topology");
  with_output(out, [&](std::ostream& o) {
    o << "asn,cone_ases,cone_prefixes,cone_slash24\n";
    for (Asn a : asns) {
      const auto m = cone_metrics(customer_cone(t, a), pfx);
      o << a << ',' << m.as_count << ',' << m.prefix_count << ',' << m.slash24_count << '\n';
    }
  });
  return 0;
}

// --- synth / score ---------------------------------------------------------

struct SynthArgs {
  SynthParams prm;
  std::size_t snapshots = 1;
  double noise = 0.0;
  std::string out_dir = ".";
  SolverFlags run;
};

int run_synth(const SynthArgs& a) {
  const auto truth = generate_topology(a.prm, a.run.seed);
  const auto snaps = emit_snapshots(truth, a.snapshots, a.noise, detail::derive_seed(a.run.seed, 1), a.run.threads);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  with_output((dir / "truth.as-rel").string(), [&](std::ostream& o) {
    write_as_rel(o, truth.topology, {"synthetic truth, seed=" + std::to_string(a.run.seed)});
  });
  with_output((dir / "vantage_points.txt").string(), [&](std::ostream& o) {
    for (Asn v : truth.vantage_points) o << v << '\n';
  });
  with_output((dir / "orgs.txt").string(), [&](std::ostream& o) { write_org_records(o, truth.orgs); });
  with_output((dir / "synonyms.txt").string(), [&](std::ostream& o) { write_synonyms(o, truth.synonyms); });
  const fs::path snap_dir = dir / "snapshots";
  fs::create_directories(snap_dir);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(2) << std::setfill('0') << i << ".txt";
    with_output((snap_dir / name.str()).string(), [&](std::ostream& o) { write_paths(o, snaps[i].paths); });
  }
  std::cerr << "ases=" << truth.topology.graph.vertices.size() << ' ' << format_summary(summarize(truth.topology))
            << " snapshots=" << snaps.size() << '\n';
  return 0;
}

int run_score(const std::string& inferred, const std::string& truth_file, const std::string& out) {
  const auto r = score(load_topology(inferred), load_topology(truth_file));
  with_output(out, [&](std::ostream& o) {
    o << "kind,total,correct,percent\n";
    for (auto k : {RelKind::C2P, RelKind::P2P, RelKind::S2S})
      o << to_string(k) << ',' << r.kind(k).total << ',' << r.kind(k).correct << ',' << fixed(r.kind(k).percent(), 2)
        << '\n';
    o << "overall," << r.overall.total << ',' << r.overall.correct << ',' << fixed(r.overall.percent(), 2) << '\n';
  });
  std::cerr << "coverage=" << fixed(100.0 * r.coverage(), 2) << "% of true links, c2p reversed=" << r.c2p_reversed
            << "\nconfusion (rows inferred, columns true: c2p p2p s2s)\n";
  for (std::size_t i = 0; i < 3; ++i) {
    std::cerr << "  " << std::setw(4) << to_string(static_cast<RelKind>(i));
    for (std::size_t j = 0; j < 3; ++j) std::cerr << ' ' << std::setw(7) << r.confusion[i][j];
    std::cerr << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AS relationship inference from BGP paths"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags win");
  app.config_formatter(std::make_shared<SubcommandConfig>(app));
  auto unit = CLI::Range(0.0, 1.0);

  SanitizeArgs san;
  auto* c_san = app.add_subcommand("sanitize", "Stable paths, persistency histogram and degree-valley table");
  c_san->fallthrough();
  c_san->add_option("--paths", san.paths, "Snapshot files or directories")->required();
  c_san->add_option("--min-persistency", san.min_persistency, "Snapshots a path must appear in (0 = all)");
  c_san->add_option("--out", san.out, "Stable path file (default stdout)");
  c_san->add_option("--persistency-csv", san.persistency_csv);
  c_san->add_option("--valleys-csv", san.valleys_csv);
  c_san->add_option("--margins", san.margins, "Degree margins w")->delimiter(',');
  c_san->add_option("--sample-size", san.sample_size, "Paths per sample; a set no larger is counted whole (0 = size of the smaller set)");
  c_san->add_option("--trials", san.trials);
  add_solver_flags(c_san, san.run);

  InferArgs inf;
  auto* c_inf = app.add_subcommand("infer", "Label every link c2p, p2p or s2s");
  c_inf->fallthrough();
  add_path_inputs(c_inf, inf.in);
  c_inf->add_option("--alpha", inf.alpha, "Weight of path validity against degree gradient")->check(unit);
  c_inf->add_option("--w-e", inf.w_e, "p2p threshold on g (default g(3,545))")->check(unit);
  c_inf->add_flag("--exact", inf.exact, "Exhaustive MAX-2-SAT (small inputs only)");
  c_inf->add_option("--out", inf.out, "as-rel output (default stdout)");
  add_solver_flags(c_inf, inf.run);

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep", "Invalid paths and top hierarchy over an alpha grid");
  c_sw->fallthrough();
  add_path_inputs(c_sw, sw.in);
  c_sw->add_option("--alpha-grid", sw.grid)->delimiter(',')->check(unit);
  c_sw->add_option("--expected-top", sw.expected_top, "ASes expected at the top of the hierarchy")->delimiter(',');
  c_sw->add_option("--top-window", sw.top_window)->check(CLI::PositiveNumber);
  c_sw->add_option("--out", sw.out, "CSV output (default stdout)");
  add_solver_flags(c_sw, sw.run);

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Choose the p2p threshold against known relationships");
  c_cal->fallthrough();
  add_path_inputs(c_cal, cal.in);
  c_cal->add_option("--truth", cal.truth, "as-rel file with known relationships")->required();
  c_cal->add_option("--alpha", cal.alpha)->check(unit);
  c_cal->add_option("--grid", cal.grid, "Thresholds to try (default 0,0.05,...,1)")->delimiter(',')->check(unit);
  c_cal->add_option("--out", cal.out, "CSV output (default stdout)");
  add_solver_flags(c_cal, cal.run);

  std::string rank_in, rank_out;
  auto* c_rank = app.add_subcommand("rank", "Reachability, depth and width per AS");
  c_rank->fallthrough();
  c_rank->add_option("--as-rel", rank_in)->required();
  c_rank->add_option("--out", rank_out);

  std::string cone_in, cone_pfx, cone_out;
  std::vector<Asn> cone_asns;
  auto* c_cone = app.add_subcommand("cone", "Customer cone sizes");
  c_cone->fallthrough();
  c_cone->add_option("--as-rel", cone_in)->required();
  c_cone->add_option("--prefixes", cone_pfx, "ASN|a.b.c.d/len lines");
  c_cone->add_option("--asn", cone_asns, "ASes to report (default all)")->delimiter(',');
  c_cone->add_option("--out", cone_out);

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "Generate a labeled topology and its path snapshots");
  c_syn->fallthrough();
  c_syn->add_option("--tier-sizes", syn.prm.tier_sizes)->delimiter(',');
  c_syn->add_option("--providers-min", syn.prm.providers_min);
  c_syn->add_option("--providers-max", syn.prm.providers_max);
  c_syn->add_option("--p2p-prob", syn.prm.p2p_prob)->check(unit);
  c_syn->add_option("--s2s-groups", syn.prm.s2s_groups);
  c_syn->add_option("--vantage-points", syn.prm.vantage_points);
  c_syn->add_option("--snapshots", syn.snapshots)->check(CLI::PositiveNumber);
  c_syn->add_option("--noise", syn.noise)->check(unit);
  c_syn->add_option("--out-dir", syn.out_dir);
  add_solver_flags(c_syn, syn.run);

  std::string sc_inf, sc_truth, sc_out;
  auto* c_sc = app.add_subcommand("score", "Accuracy of inferred labels against a truth file");
  c_sc->fallthrough();
  c_sc->add_option("--inferred", sc_inf)->required();
  c_sc->add_option("--truth", sc_truth)->required();
  c_sc->add_option("--out", sc_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*c_san) return run_sanitize(san);
    if (*c_inf) return run_infer(inf);
    if (*c_sw) return run_sweep(sw);
    if (*c_cal) return run_calibrate(cal);
    if (*c_rank) return run_rank(rank_in, rank_out);
    if (*c_cone) return run_cone(cone_in, cone_pfx, cone_asns, cone_out);
    if (*c_syn) return run_synth(syn);
    if (*c_sc) return run_score(sc_inf, sc_truth, sc_out);
  } catch (const LimitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << (e.line() ? " (line " + std::to_string(e.line()) + ")" : "") << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
