// exsel: exemplar selection, clustering and classification from the shell.
//
//   exsel synth    --D 5 --dims 3,3 --counts 10,90 --seed 7 --out data.csv
//   exsel select   --data data.csv --with-labels --k 10 --out sel.json
//   exsel cluster  --data data.csv --with-labels --k 10 --labels-out pred.csv
//   exsel classify --data data.csv --with-labels --exemplars ex.json
//   exsel eval     --truth truth.csv --pred pred.csv
//   exsel oracle   --check gauge --trials 100
//
// Structured results go to stdout (or --out) as JSON; errors go to stderr
// as JSON with a nonzero exit status.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "exsel/exsel.hpp"

using json = nlohmann::json;
using namespace exsel;

namespace {

struct Common {
  std::string data;
  bool with_labels = false;
  double lambda = 100.0;
  double tol = 1e-8;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string out;
};

struct SelectFlags {
  Index k = 0;
  std::string method = "ffs";
  std::optional<Index> first_index;
};

void add_common(CLI::App* cmd, Common& c, bool needs_data = true) {
  if (needs_data) {
    cmd->add_option("--data", c.data, "input CSV, one sample per row")->required();
    cmd->add_flag("--with-labels", c.with_labels, "last CSV column holds integer labels");
    cmd->add_option("--lambda", c.lambda, "self-representation weight (> 1)")
        ->capture_default_str();
    cmd->add_option("--tol", c.tol, "solver duality-gap tolerance")->capture_default_str();
  }
  cmd->add_option("--threads", c.threads, "worker thread cap")->capture_default_str();
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "output path (default stdout)");
}

void add_selection(CLI::App* cmd, SelectFlags& s, bool k_required) {
  auto* k = cmd->add_option("--k", s.k, "number of exemplars");
  if (k_required) k->required();
  cmd->add_option("--method", s.method, "exemplar selection method")
      ->check(CLI::IsMember({"ffs", "ffs-naive", "random"}))
      ->capture_default_str();
  cmd->add_option("--first-index", s.first_index, "override the seeded first exemplar");
}

SelectionMethod parse_method(const std::string& m) {
  if (m == "ffs-naive") return SelectionMethod::kFfsNaive;
  if (m == "random") return SelectionMethod::kRandom;
  return SelectionMethod::kFfs;
}

json config_json(const std::string& command, const Common& c) {
  json j{{"command", command}, {"seed", c.seed}, {"threads", c.threads}};
  if (!c.data.empty()) {
    j["data"] = c.data;
    j["with_labels"] = c.with_labels;
    j["lambda"] = c.lambda;
    j["tol"] = c.tol;
  }
  return j;
}

void add_selection_config(json& cfg, const SelectFlags& s) {
  cfg["k"] = s.k;
  cfg["method"] = s.method;
  cfg["first_index"] = s.first_index ? json(*s.first_index) : json(nullptr);
}

void emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  require(out.good(), Errc::kIo, "cannot open '" + path + "' for writing");
  out << text;
  require(out.good(), Errc::kIo, "write to '" + path + "' failed");
}

json selection_json(const ExemplarSet& s) {
  json trace = json::array();
  for (const SelectionStep& step : s.trace)
    trace.push_back({{"selected", step.selected}, {"f_value", step.f_value}, {"evals", step.evals}});
  return {{"indices", s.indices}, {"k", s.k},        {"lambda", s.lambda},
          {"seed", s.seed},       {"trace", trace}, {"total_evals", s.total_evals()}};
}

json null_metrics() {
  return {{"accuracy", nullptr}, {"fscore", nullptr}, {"imbalance", nullptr}, {"sp_rate", nullptr}};
}

json labelled_metrics(const Labels& truth, const Labels& pred, const std::vector<Index>& exemplars,
                      const std::vector<SparseCode>& codes) {
  json m = null_metrics();
  m["accuracy"] = clustering_accuracy(truth, pred);
  m["fscore"] = clustering_fscore(truth, pred);
  if (!exemplars.empty()) m["imbalance"] = imbalance(selected_class_counts(exemplars, truth));
  if (!codes.empty()) {
    Labels ex_labels;
    for (Index i : exemplars) ex_labels.push_back(truth[static_cast<std::size_t>(i)]);
    m["sp_rate"] = subspace_preserving_rate(codes, ex_labels, truth).rate;
  }
  return m;
}

FfsOptions ffs_options(const Common& c, const SelectFlags& s) {
  FfsOptions o;
  o.lasso.tol = c.tol;
  o.first_index = s.first_index;
  return o;
}

// --- subcommands ---------------------------------------------------------

struct SynthFlags {
  Index dim = 0;
  std::vector<Index> dims, counts;
  double sigma = 0.0;
};

int run_synth(const Common& c, const SynthFlags& f) {
  const DataMatrix d = synth_union_of_subspaces({f.dim, f.dims, f.counts, f.sigma, c.seed});
  if (c.out.empty()) {
    write_csv(std::cout, d, true);
  } else {
    save_csv(d, c.out, true);
  }
  return 0;
}

int run_select(const Common& c, const SelectFlags& s) {
  const DataMatrix d = load_csv(c.data, c.with_labels);
  const ExemplarSet sel = select_exemplars(d, c.lambda, s.k, c.seed, parse_method(s.method),
                                           ffs_options(c, s));
  json out = selection_json(sel);
  out["config"] = config_json("select", c);
  add_selection_config(out["config"], s);
  if (d.has_labels()) {
    json ex = json::object();
    for (Index i : sel.indices) ex[std::to_string(i)] = (*d.labels())[static_cast<std::size_t>(i)];
    out["exemplar_labels"] = ex;
    out["imbalance"] = imbalance(selected_class_counts(sel.indices, *d.labels()));
  }
  emit(out, c.out);
  return 0;
}

struct ClusterFlags {
  Index t = 3;
  int n_clusters = 2;
  std::string labels_out;
};

int run_cluster(const Common& c, const SelectFlags& s, const ClusterFlags& f) {
  const DataMatrix d = load_csv(c.data, c.with_labels);
  EscParams p;
  p.lambda = c.lambda;
  p.k = s.k;
  p.t = f.t;
  p.n_clusters = f.n_clusters;
  p.seed = c.seed;
  p.method = parse_method(s.method);
  p.lasso.tol = c.tol;
  p.first_index = s.first_index;
  p.threads = c.threads;
  const EscResult r = esc_pipeline(d, p);
  if (!f.labels_out.empty()) save_labels(r.assignment.labels, f.labels_out);

  json cfg = config_json("cluster", c);
  add_selection_config(cfg, s);
  cfg["t"] = f.t;
  cfg["n_clusters"] = f.n_clusters;
  cfg["labels_out"] = f.labels_out;
  json out{{"config", cfg},
           {"exemplars", r.exemplars.indices},
           {"isolated", r.assignment.isolated},
           {"warnings", r.warnings}};
  out["metrics"] = d.has_labels()
                       ? labelled_metrics(*d.labels(), r.assignment.labels, r.exemplars.indices, r.codes)
                       : null_metrics();
  if (f.labels_out.empty()) out["labels"] = r.assignment.labels;
  emit(out, c.out);
  return 0;
}

struct ClassifyFlags {
  std::string exemplars;
  std::string labels_out;
};

LabeledExemplars read_exemplars(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::kIo, "cannot open '" + path + "' for reading");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::kParseError, "'" + path + "': " + e.what());
  }
  // Either {"index": class, ...} or a select output carrying exemplar_labels.
  if (j.contains("exemplar_labels")) j = j["exemplar_labels"];
  require(j.is_object(), Errc::kParseError, "'" + path + "': expected an object of index: class");
  std::vector<Index> indices;
  std::map<Index, int> class_of;
  for (const auto& [key, value] : j.items()) {
    Index idx = 0;
    try {
      std::size_t used = 0;
      idx = static_cast<Index>(std::stoll(key, &used));
      require(used == key.size(), Errc::kParseError, "bad exemplar index '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error(Errc::kParseError, "bad exemplar index '" + key + "'");
    }
    require(value.is_number_integer(), Errc::kParseError,
            "class of exemplar " + key + " must be an integer");
    indices.push_back(idx);
    class_of[idx] = value.get<int>();
  }
  std::sort(indices.begin(), indices.end());
  return LabeledExemplars(indices, class_of);
}

int run_classify(const Common& c, const SelectFlags& s, const ClassifyFlags& f) {
  const DataMatrix d = load_csv(c.data, c.with_labels);
  std::optional<LabeledExemplars> ex;
  if (!f.exemplars.empty()) {
    ex = read_exemplars(f.exemplars);
  } else {
    require(d.has_labels(), Errc::kInvalidArgument,
            "without --exemplars the data must carry labels (--with-labels)");
    require(s.k > 0, Errc::kInvalidArgument, "without --exemplars a positive --k is required");
    const ExemplarSet sel = select_exemplars(d, c.lambda, s.k, c.seed, parse_method(s.method),
                                             ffs_options(c, s));
    ex = LabeledExemplars::from_labels(sel.indices, *d.labels());
  }
  for (Index i : ex->indices())
    require(i >= 0 && i < d.count(), Errc::kInvalidArgument,
            "exemplar index " + std::to_string(i) + " out of range", static_cast<std::size_t>(i));
  LassoOptions lasso;
  lasso.tol = c.tol;
  const ClassifyResult r = src_classify(d, *ex, c.lambda, lasso, c.threads);
  if (!f.labels_out.empty()) save_labels(r.labels, f.labels_out);

  json cfg = config_json("classify", c);
  add_selection_config(cfg, s);
  cfg["exemplars"] = f.exemplars;
  cfg["labels_out"] = f.labels_out;
  json out{{"config", cfg}, {"exemplars", ex->indices()}, {"classes", r.class_ids}};
  if (d.has_labels()) {
    const Labels& truth = *d.labels();
    json m = null_metrics();
    // Plain agreement: class ids are shared between exemplars and truth.
    double right = 0.0, counted = 0.0;
    for (Index j = 0; j < d.count(); ++j) {
      if (ex->class_of().count(j)) continue;
      counted += 1.0;
      right += r.labels[static_cast<std::size_t>(j)] == truth[static_cast<std::size_t>(j)];
    }
    m["accuracy"] = counted > 0 ? 100.0 * right / counted : 100.0;
    m["fscore"] = clustering_fscore(truth, r.labels);
    m["imbalance"] = imbalance(selected_class_counts(ex->indices(), truth));
    Labels ex_labels;
    for (Index i : ex->indices()) ex_labels.push_back(ex->class_of().at(i));
    m["sp_rate"] = subspace_preserving_rate(r.codes, ex_labels, truth).rate;
    out["metrics"] = m;
  } else {
    out["metrics"] = null_metrics();
  }
  if (f.labels_out.empty()) out["labels"] = r.labels;
  emit(out, c.out);
  return 0;
}

struct EvalFlags {
  std::string truth, pred;
};

int run_eval(const Common& c, const EvalFlags& f) {
  const Labels truth = load_labels(f.truth);
  const Labels pred = load_labels(f.pred);
  json cfg = config_json("eval", c);
  cfg["truth"] = f.truth;
  cfg["pred"] = f.pred;
  json m = null_metrics();
  m["accuracy"] = clustering_accuracy(truth, pred);
  m["fscore"] = clustering_fscore(truth, pred);
  emit({{"config", cfg}, {"metrics", m}}, c.out);
  return 0;
}

struct OracleFlags {
  std::string check = "gauge";
  int trials = 100;
  double resolution = 1e-3;
};

int run_oracle(const Common& c, const OracleFlags& f) {
  require(f.trials > 0, Errc::kInvalidArgument, "--trials must be positive");
  CounterRng rng(c.seed);
  auto unit = [&](Index dim) {
    Vector v(dim);
    do {
      for (Index i = 0; i < dim; ++i) v(i) = rng.normal();
    } while (v.norm() < 1e-8);
    return Vector(v / v.norm());
  };
  auto unit_columns = [&](Index dim, Index count) {
    Matrix m(dim, count);
    for (Index j = 0; j < count; ++j) m.col(j) = unit(dim);
    return m;
  };

  double worst = 0.0, bound = 0.0;
  int skipped = 0;
  if (f.check == "gauge") {
    // Gauge of conv(±X0) against exact l1 minimization in R^3.
    bound = 1e-8;
    for (int t = 0; t < f.trials; ++t) {
      const Index m = 3 + static_cast<Index>(rng.below(6));
      const Matrix x0 = unit_columns(3, m);
      const Vector x = unit(3);
      const L1Result l1 = l1_min_exact(x0, x);
      if (!l1.feasible()) {
        ++skipped;
        continue;
      }
      worst = std::max(worst, std::abs(minkowski_functional(SymmetricHull(x0), x) - l1.value));
    }
  } else if (f.check == "chain") {
    // Sup of the l1 cost, inverse inradius and inverse cosine of the
    // covering radius for random symmetric sets on the circle.
    bound = 2e-3;
    for (int t = 0; t < f.trials; ++t) {
      const Index m = 2 + static_cast<Index>(rng.below(7));
      const Matrix x0 = unit_columns(2, m);
      Matrix sym(2, 2 * m);
      sym << x0, -x0;
      const double a = sup_l1_cost_on_sphere(x0, f.resolution);
      const double b = 1.0 / inradius(SymmetricHull(x0), f.resolution);
      const double g = 1.0 / std::cos(covering_radius(sym, std::min(f.resolution, 1e-7)));
      worst = std::max({worst, std::abs(a - b), std::abs(a - g), std::abs(b - g)});
    }
  } else {
    // Duality-gap certificate of the solver.
    bound = c.tol;
    LassoOptions lasso;
    lasso.tol = c.tol;
    for (int t = 0; t < f.trials; ++t) {
      const Index dim = 2 + static_cast<Index>(rng.below(10));
      const Index m = 1 + static_cast<Index>(rng.below(20));
      const double lambda = std::pow(10.0, 0.1 + 4.0 * rng.uniform());
      const SparseCode code = solve_lasso({unit_columns(dim, m), unit(dim), lambda}, lasso);
      worst = std::max(worst, code.gap);
    }
  }
  json cfg = config_json("oracle", c);
  cfg["check"] = f.check;
  cfg["trials"] = f.trials;
  cfg["resolution"] = f.resolution;
  cfg["tol"] = c.tol;
  emit({{"config", cfg},
        {"check", f.check},
        {"trials", f.trials},
        {"skipped", skipped},
        {"max_deviation", worst},
        {"bound", bound},
        {"pass", worst <= bound}},
       c.out);
  return 0;
}

void report_error(const std::string& kind, const std::string& message,
                  std::optional<std::size_t> index = std::nullopt) {
  json e{{"error", kind}, {"message", message}};
  if (index) e["index"] = *index;
  std::cerr << e.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exemplar selection for union-of-subspaces data"};
  app.require_subcommand(1);

  Common common;
  SelectFlags sel;
  SynthFlags synth;
  ClusterFlags cluster;
  ClassifyFlags classify;
  EvalFlags eval;
  OracleFlags oracle;

  auto* c_synth = app.add_subcommand("synth", "sample points from a union of random subspaces");
  c_synth->add_option("--D", synth.dim, "ambient dimension")->required();
  c_synth->add_option("--dims", synth.dims, "subspace dimensions")->delimiter(',')->required();
  c_synth->add_option("--counts", synth.counts, "points per subspace")->delimiter(',')->required();
  c_synth->add_option("--sigma", synth.sigma, "noise level")->capture_default_str();
  add_common(c_synth, common, false);

  auto* c_select = app.add_subcommand("select", "choose exemplars");
  add_common(c_select, common);
  add_selection(c_select, sel, true);

  auto* c_cluster = app.add_subcommand("cluster", "exemplar-based subspace clustering");
  add_common(c_cluster, common);
  add_selection(c_cluster, sel, true);
  c_cluster->add_option("--t", cluster.t, "neighbours per point")->capture_default_str();
  c_cluster->add_option("--n-clusters", cluster.n_clusters, "number of clusters")
      ->capture_default_str();
  c_cluster->add_option("--labels-out", cluster.labels_out, "write predicted labels here");

  auto* c_classify = app.add_subcommand("classify", "label points from labelled exemplars");
  add_common(c_classify, common);
  add_selection(c_classify, sel, false);
  c_classify->add_option("--exemplars", classify.exemplars,
                         "JSON object of exemplar index to class");
  c_classify->add_option("--labels-out", classify.labels_out, "write predicted labels here");

  auto* c_eval = app.add_subcommand("eval", "compare two label files");
  c_eval->add_option("--truth", eval.truth, "reference labels")->required();
  c_eval->add_option("--pred", eval.pred, "predicted labels")->required();
  c_eval->add_option("--out", common.out, "output path (default stdout)");

  auto* c_oracle = app.add_subcommand("oracle", "audit numerical identities");
  add_common(c_oracle, common, false);
  c_oracle->add_option("--check", oracle.check, "which audit")
      ->check(CLI::IsMember({"gauge", "chain", "certificate"}))
      ->capture_default_str();
  c_oracle->add_option("--trials", oracle.trials, "number of random instances")
      ->capture_default_str();
  c_oracle->add_option("--resolution", oracle.resolution, "sphere grid spacing (radians)")
      ->capture_default_str();
  c_oracle->add_option("--tol", common.tol, "solver tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("Usage", e.what());
    return 2;
  }

  try {
    if (*c_synth) return run_synth(common, synth);
    if (*c_select) return run_select(common, sel);
    if (*c_cluster) return run_cluster(common, sel, cluster);
    if (*c_classify) return run_classify(common, sel, classify);
    if (*c_eval) return run_eval(common, eval);
    if (*c_oracle) return run_oracle(common, oracle);
  } catch (const Error& e) {
    report_error(std::string(errc_name(e.code())), e.what(), e.index());
    return 1;
  } catch (const std::exception& e) {
    report_error("Internal", e.what());
    return 1;
  }
  return 1;
}
