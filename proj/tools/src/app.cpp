/*
 * Copyright 2026 The pairdis Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "pairdis/cli/app.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pairdis/checkpoint.hpp"
#include "pairdis/cli/manifest.hpp"
#include "pairdis/cli/pgm.hpp"
#include "pairdis/datasets.hpp"
#include "pairdis/error.hpp"
#include "pairdis/evaluation.hpp"
#include "pairdis/log.hpp"
#include "pairdis/metrics.hpp"
#include "pairdis/model.hpp"
#include "pairdis/optimizer.hpp"
#include "pairdis/parallel.hpp"
#include "pairdis/random.hpp"
#include "pairdis/tensor_io.hpp"
#include "pairdis/trainer.hpp"

namespace pairdis::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double require_finite(const std::string& what, double v) {
  if (!std::isfinite(v)) throw NumericError(what + " is not finite");
  return v;
}

// ---- option groups ---------------------------------------------------------

struct CommonOpts {
  std::uint64_t seed = 0;
  std::string run_dir;
  std::string runs_root = "runs";
  std::string config;
};

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--seed", c.seed, "Master seed; PAIRDIS_SEED overrides it when set");
  sub->add_option("--run-dir", c.run_dir,
                  "Run directory to use instead of <runs-root>/<timestamp>-seed<seed>-<command>");
  sub->add_option("--runs-root", c.runs_root, "Parent of timestamped run directories");
  sub->add_option("--config", c.config, "Flat key=value file of long option names; flags win");
}

struct ModelOpts {
  std::size_t d_u = 2;
  std::size_t d_v = 8;
  std::vector<std::size_t> hidden{256, 128};
  double beta = 1.0;
  double eta1 = 1e3;
  double eta2 = 2.0;
  std::string kind = "auto";
  std::string baseline;
};

void add_model(CLI::App* sub, ModelOpts& m) {
  sub->add_option("--d-u", m.d_u, "Dimensions of the relevant block z^(u)");
  sub->add_option("--d-v", m.d_v, "Dimensions of the residual block z^(v)");
  sub->add_option("--hidden", m.hidden, "Hidden layer widths, comma separated")->delimiter(',');
  sub->add_option("--beta", m.beta, "KL weight on z^(u) (on all of z for the baseline)");
  sub->add_option("--eta1", m.eta1, "Steepness of the similarity logit");
  sub->add_option("--eta2", m.eta2, "Squared-distance threshold of the similarity logit");
  sub->add_option("--kind", m.kind, "Label kind: auto, binary or real")
      ->check(CLI::IsMember({"auto", "binary", "real"}));
  sub->add_option("--baseline", m.baseline, "Train the unsupervised baseline instead")
      ->check(CLI::IsMember({"beta-vae"}));
}

struct TrainOpts {
  std::size_t epochs = 40;
  std::size_t batch_size = 100;
  std::size_t pairs_per_step = 50;
  double lr = 1e-3;
  std::string optimizer = "adaptive-moment";
};

void add_train(CLI::App* sub, TrainOpts& t) {
  sub->add_option("--epochs", t.epochs, "Passes over the training images");
  sub->add_option("--batch-size", t.batch_size, "Images per step");
  sub->add_option("--pairs-per-step", t.pairs_per_step, "Labelled pairs per step");
  sub->add_option("--lr", t.lr, "Step size");
  sub->add_option("--optimizer", t.optimizer, "adaptive-moment or plain-sgd");
}

sim::LabelKind resolve_kind(const std::string& kind, data::FactorKind factor) {
  if (kind == "auto") {
    return factor == data::FactorKind::cyclic ? sim::LabelKind::real : sim::LabelKind::binary;
  }
  return sim::parse_label_kind(kind);
}

model::ModelConfig make_model_config(const ModelOpts& m, sim::LabelKind kind) {
  model::ModelConfig cfg;
  cfg.d_u = m.d_u;
  cfg.d_v = m.d_v;
  cfg.hidden_sizes = m.hidden;
  cfg.beta = m.beta;
  cfg.sim.eta1 = m.eta1;
  cfg.sim.eta2 = m.eta2;
  cfg.sim.kind = kind;
  cfg.objective = m.baseline.empty() ? model::ObjectiveKind::proposed
                                     : model::parse_objective_kind(m.baseline);
  cfg.validate();
  return cfg;
}

train::TrainConfig make_train_config(const TrainOpts& t, std::uint64_t seed) {
  train::TrainConfig cfg;
  cfg.epochs = t.epochs;
  cfg.batch_size = t.batch_size;
  cfg.pairs_per_step = t.pairs_per_step;
  cfg.learning_rate = t.lr;
  cfg.optimizer = train::parse_optimizer_kind(t.optimizer);
  cfg.seed = seed;
  return cfg;
}

// ---- config files, seed override, snapshots --------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

void apply_config_file(CLI::App* sub, const std::string& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot read config file " + file);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(file + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError(file + ":" + std::to_string(lineno) + ": unknown option '" + key + "'");
    }
    if (key == "config") throw UsageError(file + ": config files do not nest");
    if (opt->count() != 0) continue;  // given on the command line
    opt->add_result(value);
    opt->run_callback();
  }
}

void apply_seed_override(CommonOpts& c) {
  const char* env = std::getenv("PAIRDIS_SEED");
  if (env == nullptr || *env == '\0') return;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    c.seed = v;
  } catch (const std::exception&) {
    throw UsageError(std::string("PAIRDIS_SEED is not an unsigned integer: '") + env + "'");
  }
}

std::map<std::string, std::string> snapshot(const CLI::App* sub, const CommonOpts& c) {
  std::map<std::string, std::string> out;
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "help-all" || name == "config") continue;
    if (opt->count() == 0) {
      out[name] = opt->get_default_str();
    } else {
      std::string joined;
      for (const std::string& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
      out[name] = joined;
    }
  }
  out["seed"] = std::to_string(c.seed);
  return out;
}

// ---- run directories ---------------------------------------------------------

class Run {
 public:
  Run(const std::string& command, const CommonOpts& c, const CLI::App* sub,
      const std::map<std::string, fs::path>& inputs) {
    for (const auto& [role, path] : inputs) {
      if (!fs::exists(path)) throw UsageError(command + ": missing input " + role + " '" + path.string() + "'");
    }
    dir_ = c.run_dir.empty() ? timestamped_run_dir(c.runs_root, command, c.seed) : fs::path(c.run_dir);
    fs::create_directories(dir_);
    manifest_.command = command;
    manifest_.seed = c.seed;
    manifest_.config = snapshot(sub, c);
    for (const auto& [role, path] : inputs) manifest_.inputs[role] = path.string();
    manifest_.input_hash = inputs_hash(inputs);
  }

  const fs::path& dir() const { return dir_; }
  std::uint64_t seed() const { return manifest_.seed; }

  /// Path of a file output, recorded in the manifest.
  fs::path file(const std::string& name) {
    manifest_.outputs.push_back(name);
    return dir_ / name;
  }

  /// Records every file below a directory output.
  void tree(const std::string& name) {
    for (const auto& e : fs::recursive_directory_iterator(dir_ / name)) {
      if (e.is_regular_file()) manifest_.outputs.push_back(fs::relative(e.path(), dir_).generic_string());
    }
  }

  void finish(std::ostream& out) {
    manifest_.write(dir_);
    out << "run-dir " << dir_.string() << "\n";
  }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FormatError("cannot write " + p.string());
  return out;
}

void write_metrics(const fs::path& p, const std::string& dataset, std::uint64_t seed,
                   const std::vector<std::pair<std::string, double>>& rows) {
  std::ofstream out = open_out(p);
  out << "metric,dataset,seed,value\n";
  for (const auto& [metric, value] : rows) {
    require_finite(metric, value);
    out << metric << "," << dataset << "," << seed << "," << num(value) << "\n";
  }
  if (!out) throw FormatError("cannot write " + p.string());
}

// ---- data directories --------------------------------------------------------

struct DataDir {
  Tensor images;
  data::FactorTable factors;
  std::string dataset = "unknown";
};

DataDir load_data(const fs::path& dir) {
  DataDir d;
  d.images = load_tensor(dir / "images.pdt");
  std::ifstream in(dir / "factors.csv");
  if (!in) throw UsageError("missing factors.csv in " + dir.string());
  d.factors = data::read_factors_csv(in);
  if (d.images.rank() != 3 || d.images.dim(0) != d.factors.size())
    throw FormatError("images and factors in " + dir.string() + " do not match");
  if (fs::exists(dir / "manifest.json")) {
    const RunManifest m = RunManifest::read(dir);
    if (auto it = m.config.find("dataset"); it != m.config.end()) d.dataset = it->second;
  }
  return d;
}

sim::PairBatch load_pairs(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot read pairs " + file.string());
  return data::read_pairs_csv(in);
}

// ---- commands ----------------------------------------------------------------

struct GenDataOpts {
  std::string dataset = "blobs";
  std::size_t n = 5000;
};

void cmd_gen_data(const CLI::App* sub, const CommonOpts& c, const GenDataOpts& o, std::ostream& out) {
  Run run("gen-data", c, sub, {});
  const data::SyntheticDataset ds = data::gen_synthetic(o.dataset, o.n, run.seed());
  if (!ds.images.all_finite()) throw NumericError("gen-data: non-finite pixels");
  save_tensor(run.file("images.pdt"), ds.images);
  std::ofstream f = open_out(run.file("factors.csv"));
  data::write_factors_csv(f, ds.factors);
  f.close();
  out << "generated " << o.n << " " << o.dataset << " images\n";
  run.finish(out);
}

struct GenPairsOpts {
  std::string data;
  std::string kind = "auto";
  double proportion = 1e-4;
  double rbf_sigma = 30.0;
  double gamma = 0.0;
};

void cmd_gen_pairs(const CLI::App* sub, const CommonOpts& c, const GenPairsOpts& o, std::ostream& out) {
  Run run("gen-pairs", c, sub, {{"data", o.data}});
  const DataDir d = load_data(o.data);
  data::LabelGenConfig lc;
  lc.kind = resolve_kind(o.kind, d.factors.kind);
  lc.proportion = o.proportion;
  lc.rbf_sigma = o.rbf_sigma;
  lc.noise_gamma = o.gamma;
  lc.seed = run.seed();
  const sim::PairBatch pairs = data::make_labels(d.factors, lc);
  std::ofstream f = open_out(run.file("pairs.csv"));
  data::write_pairs_csv(f, pairs);
  f.close();
  out << "labelled " << pairs.size() << " " << sim::to_string(lc.kind) << " pairs\n";
  run.finish(out);
}

struct TrainCmdOpts {
  std::string data;
  std::string pairs;
};

void cmd_train(const CLI::App* sub, const CommonOpts& c, const TrainCmdOpts& o, const ModelOpts& m,
               const TrainOpts& t, std::ostream& out) {
  std::map<std::string, fs::path> inputs{{"data", o.data}};
  if (m.baseline.empty() && o.pairs.empty())
    throw UsageError("train: --pairs is required unless --baseline beta-vae is given");
  if (!o.pairs.empty()) inputs["pairs"] = o.pairs;
  Run run("train", c, sub, inputs);
  const DataDir d = load_data(o.data);
  const model::ModelConfig mc = make_model_config(m, resolve_kind(m.kind, d.factors.kind));
  const sim::PairBatch pairs = o.pairs.empty() ? sim::PairBatch{} : load_pairs(o.pairs);
  model::VaeModel model(mc, derive_seed(run.seed(), stream::kInit));
  train::TrainConfig tc = make_train_config(t, run.seed());
  tc.checkpoint_dir = run.dir() / "checkpoint";
  const train::TrainResult res = train::train(model, d.images, pairs, tc);
  run.tree("checkpoint");

  std::ofstream f = open_out(run.file("loss.csv"));
  train::write_loss_csv(f, res.history);
  f.close();
  const train::EpochRecord& last = res.history.back();
  write_metrics(run.file("metrics.csv"), d.dataset, run.seed(),
                {{"final_recon_term", last.recon},
                 {"final_pair_term", last.pair},
                 {"final_kl_u", last.kl_u},
                 {"final_kl_v", last.kl_v},
                 {"final_total", last.total}});
  out << "trained " << model::to_string(mc.objective) << " for " << tc.epochs
      << " epochs, final objective " << num(last.total) << "\n";
  run.finish(out);
}

struct XvalOpts {
  std::string data;
  std::string pairs;
  std::vector<double> grid{1, 2, 4, 8, 16};
  std::size_t folds = 5;
  std::size_t ll_samples = 8;
  std::size_t jobs = 1;
};

void cmd_xval(const CLI::App* sub, const CommonOpts& c, const XvalOpts& o, const ModelOpts& m,
              const TrainOpts& t, std::ostream& out) {
  if (!m.baseline.empty()) throw UsageError("xval-beta: the baseline has no pair likelihood to score");
  Run run("xval-beta", c, sub, {{"data", o.data}, {"pairs", o.pairs}});
  const DataDir d = load_data(o.data);
  const model::ModelConfig mc = make_model_config(m, resolve_kind(m.kind, d.factors.kind));
  train::TrainConfig tc = make_train_config(t, run.seed());
  tc.beta_grid = o.grid;
  tc.folds = o.folds;
  tc.ll_samples = o.ll_samples;
  tc.jobs = o.jobs;
  const train::CrossvalResult r = train::crossval_beta(mc, d.images, load_pairs(o.pairs), tc);

  std::ofstream f = open_out(run.file("xval.csv"));
  f << "beta,mean_joint_ll,mean_recon,mean_pair";
  for (std::size_t k = 0; k < o.folds; ++k) f << ",fold_" << k;
  f << "\n";
  out << "beta  mean_joint_ll\n";
  for (const train::CrossvalRow& row : r.rows) {
    require_finite("joint log-likelihood", row.mean_joint_ll);
    f << num(row.beta) << "," << num(row.mean_joint_ll) << "," << num(row.mean_recon) << ","
      << num(row.mean_pair);
    for (double v : row.fold_joint_ll) f << "," << num(v);
    f << "\n";
    char line[96];
    std::snprintf(line, sizeof line, "%-5g %.6f\n", row.beta, row.mean_joint_ll);
    out << line;
  }
  f.close();
  write_metrics(run.file("metrics.csv"), d.dataset, run.seed(), {{"selected_beta", r.selected_beta}});
  out << "selected beta " << num(r.selected_beta) << "\n";
  run.finish(out);
}

struct EvalMigOpts {
  std::string checkpoint;
  std::string data;
  std::size_t bins = 20;
  std::size_t factor_bins = 20;
  std::string latent_source = "posterior_mean";
};

void cmd_eval_mig(const CLI::App* sub, const CommonOpts& c, const EvalMigOpts& o, std::ostream& out) {
  Run run("eval-mig", c, sub, {{"checkpoint", o.checkpoint}, {"data", o.data}});
  const LoadedCheckpoint ck = load_checkpoint(o.checkpoint);
  const DataDir d = load_data(o.data);
  metrics::MigConfig cfg;
  cfg.bins = o.bins;
  cfg.factor_bins = o.factor_bins;
  cfg.latent_source = metrics::parse_latent_source(o.latent_source);
  const std::size_t n = d.images.dim(0);
  if (ck.model.config().d_u >= 2 && n < 4000) {
    log_warning("eval-mig: " + std::to_string(n) +
                " images are few for a joint histogram over d_u >= 2; estimates are biased upward");
  }
  const metrics::MigReport r = eval::model_mig(ck.model, d.images, d.factors, cfg,
                                               derive_seed(run.seed(), stream::kEval));
  write_metrics(run.file("metrics.csv"), d.dataset, run.seed(),
                {{"mig", r.mig},
                 {"joint_mi", r.joint_mi},
                 {"max_residual_mi", r.max_residual_mi},
                 {"factor_entropy", r.factor_entropy}});
  out << "mig " << num(r.mig) << "\n";
  run.finish(out);
}

struct EvalKnnOpts {
  std::string checkpoint;
  std::string data;
  std::string test;
  std::size_t k = 5;
};

void cmd_eval_knn(const CLI::App* sub, const CommonOpts& c, const EvalKnnOpts& o, std::ostream& out) {
  Run run("eval-knn", c, sub, {{"checkpoint", o.checkpoint}, {"data", o.data}, {"test", o.test}});
  const LoadedCheckpoint ck = load_checkpoint(o.checkpoint);
  const DataDir tr = load_data(o.data);
  const DataDir te = load_data(o.test);
  const eval::KnnReport r =
      eval::knn_on_relevant(ck.model, tr.images, tr.factors, te.images, te.factors, o.k);
  std::vector<std::pair<std::string, double>> rows;
  if (te.factors.kind == data::FactorKind::discrete) {
    rows.emplace_back("kappa", r.kappa);
    out << "kappa " << num(r.kappa) << "\n";
  } else {
    rows.emplace_back("r_squared", r.r_squared);
    out << "r_squared " << num(r.r_squared) << "\n";
    if (ck.model.config().d_u == 2 && ck.model.config().objective == model::ObjectiveKind::proposed) {
      const double rho = eval::ring_correlation(ck.model, te.images, te.factors);
      rows.emplace_back("ring_correlation", rho);
      out << "ring_correlation " << num(rho) << "\n";
    }
  }
  write_metrics(run.file("metrics.csv"), te.dataset, run.seed(), rows);
  run.finish(out);
}

struct TraverseOpts {
  std::string checkpoint;
  std::string data;
  std::size_t index = 0;
  std::size_t steps = 7;
  double extent = 3.0;
};

void cmd_traverse(const CLI::App* sub, const CommonOpts& c, const TraverseOpts& o, std::ostream& out) {
  const LoadedCheckpoint ck = load_checkpoint(o.checkpoint);
  const model::ModelConfig& mc = ck.model.config();
  if (mc.d_u > 2) throw UsageError("traverse: a grid over d_u > 2 dimensions is undefined");
  if (o.steps < 2) throw UsageError("traverse: --steps must be >= 2");
  if (mc.input_shape.size() != 2) throw UsageError("traverse: checkpoint images are not 2-d");
  Run run("traverse", c, sub, {{"checkpoint", o.checkpoint}, {"data", o.data}});
  const DataDir d = load_data(o.data);
  if (o.index >= d.images.dim(0)) throw UsageError("traverse: --index out of range");

  const Tensor code = model::encode_means(ck.model, model::take_rows(
      d.images.reshaped({d.images.dim(0), mc.pixels()}), o.index, 1));
  const std::size_t dims = mc.latent_dims();
  const std::size_t rows = mc.d_u == 2 ? o.steps : 1, cols = o.steps;
  Tensor z({rows * cols, dims});
  auto level = [&](std::size_t k) {
    return -o.extent + 2.0 * o.extent * static_cast<double>(k) / static_cast<double>(o.steps - 1);
  };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t col = 0; col < cols; ++col) {
      double* row = &z[(r * cols + col) * dims];
      for (std::size_t j = 0; j < dims; ++j) row[j] = code[j];
      row[0] = level(col);
      if (mc.d_u == 2) row[1] = level(rows - 1 - r);  // top row is +extent
    }
  }
  const Tensor images = model::decode_means(ck.model, z)
                            .reshaped({rows * cols, mc.input_shape[0], mc.input_shape[1]});
  if (!images.all_finite()) throw NumericError("traverse: decoded images are not finite");
  write_pgm_grid(run.file("traverse.pgm"), images, rows, cols);
  out << "wrote " << rows << "x" << cols << " traversal\n";
  run.finish(out);
}

struct SweepOpts {
  std::string dataset = "blobs";
  std::size_t n = 5000;
  std::size_t test_n = 5000;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string param = "proportion";
  std::vector<double> values;
  double proportion = 1e-4;
  double gamma = 0.0;
  double rbf_sigma = 30.0;
  std::string latent_source = "posterior_mean";
  std::size_t bins = 20;
  std::size_t jobs = 1;
};

void cmd_sweep(const CLI::App* sub, const CommonOpts& c, const SweepOpts& o, const ModelOpts& m,
               const TrainOpts& t, std::ostream& out) {
  if (o.values.empty()) throw UsageError("sweep: --values is empty");
  if (o.seeds.empty()) throw UsageError("sweep: --seeds is empty");
  Run run("sweep", c, sub, {});
  const std::size_t tasks = o.values.size() * o.seeds.size();
  std::vector<std::vector<std::pair<std::string, double>>> results(tasks);

  parallel_for(tasks, o.jobs, [&](std::size_t task) {
    const double value = o.values[task / o.seeds.size()];
    const std::uint64_t seed = o.seeds[task % o.seeds.size()];
    const data::SyntheticDataset tr = data::gen_synthetic(o.dataset, o.n, seed);
    const data::SyntheticDataset te =
        data::gen_synthetic(o.dataset, o.test_n, derive_seed(seed, stream::kHeldout));
    data::LabelGenConfig lc;
    lc.kind = resolve_kind(m.kind, tr.factors.kind);
    lc.proportion = o.param == "proportion" ? value : o.proportion;
    lc.noise_gamma = o.param == "gamma" ? value : o.gamma;
    lc.rbf_sigma = o.rbf_sigma;
    lc.seed = seed;
    const sim::PairBatch pairs = data::make_labels(tr.factors, lc);
    const model::ModelConfig mc = make_model_config(m, lc.kind);
    model::VaeModel model(mc, derive_seed(seed, stream::kInit));
    train::train(model, tr.images, pairs, make_train_config(t, seed));

    metrics::MigConfig cfg;
    cfg.bins = o.bins;
    cfg.latent_source = metrics::parse_latent_source(o.latent_source);
    auto& rows = results[task];
    rows.emplace_back("mig", eval::model_mig(model, te.images, te.factors, cfg,
                                             derive_seed(seed, stream::kEval)).mig);
    const eval::KnnReport knn =
        eval::knn_on_relevant(model, tr.images, tr.factors, te.images, te.factors);
    if (tr.factors.kind == data::FactorKind::discrete) {
      rows.emplace_back("kappa", knn.kappa);
    } else {
      rows.emplace_back("r_squared", knn.r_squared);
      if (mc.d_u == 2 && mc.objective == model::ObjectiveKind::proposed)
        rows.emplace_back("ring_correlation", eval::ring_correlation(model, te.images, te.factors));
    }
    log_info("sweep: " + o.param + "=" + num(value) + " seed=" + std::to_string(seed) + " done");
  });

  std::ofstream f = open_out(run.file("sweep.csv"));
  f << "param,param_value,seed,metric,value\n";
  for (std::size_t task = 0; task < tasks; ++task) {
    for (const auto& [metric, v] : results[task]) {
      require_finite(metric, v);
      f << o.param << "," << num(o.values[task / o.seeds.size()]) << ","
        << o.seeds[task % o.seeds.size()] << "," << metric << "," << num(v) << "\n";
    }
  }
  f.close();
  out << "swept " << o.param << " over " << o.values.size() << " values x " << o.seeds.size()
      << " seeds\n";
  run.finish(out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pairdis: weakly supervised disentanglement from pairwise similarity labels"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  CommonOpts common;
  ModelOpts model_opts;
  TrainOpts train_opts;

  GenDataOpts gd;
  CLI::App* gen_data = app.add_subcommand("gen-data", "Generate a synthetic labelled image set");
  gen_data->add_option("--dataset", gd.dataset, "blobs or bars")->check(CLI::IsMember({"blobs", "bars"}));
  gen_data->add_option("--n", gd.n, "Number of images");
  add_common(gen_data, common);

  GenPairsOpts gp;
  CLI::App* gen_pairs = app.add_subcommand("gen-pairs", "Sample pairwise similarity labels");
  gen_pairs->add_option("--data", gp.data, "gen-data run directory")->required();
  gen_pairs->add_option("--kind", gp.kind, "auto, binary or real")
      ->check(CLI::IsMember({"auto", "binary", "real"}));
  gen_pairs->add_option("--proportion", gp.proportion, "Fraction of all unordered pairs labelled");
  gen_pairs->add_option("--rbf-sigma", gp.rbf_sigma, "RBF bandwidth in degrees (real labels)");
  gen_pairs->add_option("--gamma", gp.gamma, "Flip probability (binary) or noise variance (real)");
  add_common(gen_pairs, common);

  TrainCmdOpts tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cmd->add_option("--data", tr.data, "gen-data run directory")->required();
  train_cmd->add_option("--pairs", tr.pairs, "pairs.csv from gen-pairs");
  add_model(train_cmd, model_opts);
  add_train(train_cmd, train_opts);
  add_common(train_cmd, common);

  XvalOpts xv;
  CLI::App* xval = app.add_subcommand("xval-beta", "Choose beta by k-fold held-out joint log-likelihood");
  xval->add_option("--data", xv.data, "gen-data run directory")->required();
  xval->add_option("--pairs", xv.pairs, "pairs.csv from gen-pairs")->required();
  xval->add_option("--grid", xv.grid, "Beta values, comma separated")->delimiter(',');
  xval->add_option("--folds", xv.folds, "Number of folds");
  xval->add_option("--ll-samples", xv.ll_samples, "Posterior draws per held-out likelihood");
  xval->add_option("--jobs", xv.jobs, "Concurrent fold trainings");
  add_model(xval, model_opts);
  add_train(xval, train_opts);
  add_common(xval, common);

  EvalMigOpts em;
  CLI::App* eval_mig = app.add_subcommand("eval-mig", "Mutual information gap of a checkpoint");
  eval_mig->add_option("--checkpoint", em.checkpoint, "Checkpoint directory")->required();
  eval_mig->add_option("--data", em.data, "Held-out gen-data run directory")->required();
  eval_mig->add_option("--bins", em.bins, "Equal-frequency bins per latent dimension");
  eval_mig->add_option("--factor-bins", em.factor_bins, "Arcs for a cyclic factor");
  eval_mig->add_option("--latent-source", em.latent_source, "posterior_mean or posterior_sample");
  add_common(eval_mig, common);

  EvalKnnOpts ek;
  CLI::App* eval_knn = app.add_subcommand("eval-knn", "k-NN prediction of the factor from z^(u)");
  eval_knn->add_option("--checkpoint", ek.checkpoint, "Checkpoint directory")->required();
  eval_knn->add_option("--data", ek.data, "Training gen-data run directory")->required();
  eval_knn->add_option("--test", ek.test, "Held-out gen-data run directory")->required();
  eval_knn->add_option("--k", ek.k, "Neighbours");
  add_common(eval_knn, common);

  TraverseOpts tv;
  CLI::App* traverse = app.add_subcommand("traverse", "Decode a grid over z^(u) with z^(v) fixed");
  traverse->add_option("--checkpoint", tv.checkpoint, "Checkpoint directory")->required();
  traverse->add_option("--data", tv.data, "gen-data run directory holding the image")->required();
  traverse->add_option("--index", tv.index, "Row of the image whose z^(v) is kept");
  traverse->add_option("--steps", tv.steps, "Grid points per z^(u) dimension");
  traverse->add_option("--extent", tv.extent, "Grid half-width in prior standard deviations");
  add_common(traverse, common);

  SweepOpts sw;
  CLI::App* sweep = app.add_subcommand("sweep", "Train and evaluate over a proportion or gamma grid");
  sweep->add_option("--dataset", sw.dataset, "blobs or bars")->check(CLI::IsMember({"blobs", "bars"}));
  sweep->add_option("--n", sw.n, "Training images per seed");
  sweep->add_option("--test-n", sw.test_n, "Held-out images per seed");
  sweep->add_option("--seeds", sw.seeds, "Seeds, comma separated")->delimiter(',');
  sweep->add_option("--param", sw.param, "proportion or gamma")->check(CLI::IsMember({"proportion", "gamma"}));
  sweep->add_option("--values", sw.values, "Grid values, comma separated")->delimiter(',')->required();
  sweep->add_option("--proportion", sw.proportion, "Proportion when sweeping gamma");
  sweep->add_option("--gamma", sw.gamma, "Noise level when sweeping proportion");
  sweep->add_option("--rbf-sigma", sw.rbf_sigma, "RBF bandwidth in degrees (real labels)");
  sweep->add_option("--latent-source", sw.latent_source, "posterior_mean or posterior_sample");
  sweep->add_option("--bins", sw.bins, "Equal-frequency bins per latent dimension");
  sweep->add_option("--jobs", sw.jobs, "Concurrent (value, seed) jobs");
  add_model(sweep, model_opts);
  add_train(sweep, train_opts);
  add_common(sweep, common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);

    CLI::App* sub = app.get_subcommands().front();
    if (!common.config.empty()) apply_config_file(sub, common.config);
    apply_seed_override(common);

    if (sub == gen_data) cmd_gen_data(sub, common, gd, out);
    else if (sub == gen_pairs) cmd_gen_pairs(sub, common, gp, out);
    else if (sub == train_cmd) cmd_train(sub, common, tr, model_opts, train_opts, out);
    else if (sub == xval) cmd_xval(sub, common, xv, model_opts, train_opts, out);
    else if (sub == eval_mig) cmd_eval_mig(sub, common, em, out);
    else if (sub == eval_knn) cmd_eval_knn(sub, common, ek, out);
    else if (sub == traverse) cmd_traverse(sub, common, tv, out);
    else if (sub == sweep) cmd_sweep(sub, common, sw, model_opts, train_opts, out);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace pairdis::cli
