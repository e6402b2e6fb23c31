// kronfeat command-line driver.
//
// Exit codes: 0 success, 1 usage or contract error, 2 data or descriptor
// error, 3 numeric failure, 4 a validation verdict failed.

#include "kronfeat/dataset.hpp"
#include "kronfeat/errors.hpp"
#include "kronfeat/learn.hpp"
#include "kronfeat/perceptron.hpp"
#include "kronfeat/random.hpp"
#include "kronfeat/serialize.hpp"
#include "kronfeat/stats.hpp"
#include "kronfeat/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

using namespace kronfeat;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitVerdict = 4;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

struct SplitSel {
  std::vector<Matrix> x;
  std::vector<std::string> y;
  std::vector<int> index;
};

SplitSel descriptors_for(const DatasetManifest& m, const std::vector<int>& idx, std::optional<double> eps) {
  SplitSel s;
  for (int i : idx) {
    s.x.push_back(make_descriptor(m.samples[i], eps).matrix());
    s.y.push_back(m.samples[i].label());
    s.index.push_back(i);
  }
  return s;
}

Pipeline train_pipeline(Method method, int nu, const std::vector<Matrix>& x, const std::vector<std::string>& y,
                        double sigma, double theta, double c, std::uint64_t seed, int mlp_epochs) {
  Pipeline p;
  p.method = method;
  const SvmOptions svm{c, 1e-4, 1000, seed};
  if (method == Method::exact) {
    p.kernel = train_kernel_svm(x, y, RbfParams{sigma}, svm);
    return p;
  }
  const int d = static_cast<int>(x.front().rows());
  if (method == Method::perceptron) {
    MlpConfig mc;
    mc.hidden_size = nu;
    mc.max_epochs = mlp_epochs;
    mc.seed = seed;
    p.map = extract_phi_p(train_mlp(x, y, mc));
  } else {
    MapSpec spec;
    spec.kind = parse_map_kind(to_string(method));
    spec.nu = nu;
    spec.input_dim = takes_matrix_input(spec.kind) ? d : d * d;
    spec.sigma = sigma;
    spec.theta = theta;
    spec.seed = seed;
    p.map = sample_map(spec);
  }
  p.linear = train_linear_svm(p.map->apply_batch(x), y, svm);
  return p;
}

Matrix random_unit_upper(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i <= j; ++i) m(i, j) = normal(rng);
  return m / m.norm();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kronecker-product random feature maps for covariance descriptors"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  double sigma = 1.0;
  double theta = 0.9;
  std::string out_path;
  std::string format = "csv";

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic skeleton dataset");
  SynthOptions so;
  synth->add_option("--classes", so.classes, "Number of classes")->capture_default_str();
  synth->add_option("--per-class", so.per_class, "Samples per class")->capture_default_str();
  synth->add_option("--joints", so.joints, "Joints per frame")->capture_default_str();
  synth->add_option("--t-min", so.t_min, "Minimum sequence length")->capture_default_str();
  synth->add_option("--t-max", so.t_max, "Maximum sequence length")->capture_default_str();
  synth->add_option("--noise", so.noise, "Gaussian noise level")->capture_default_str();
  synth->add_option("--train-fraction", so.train_fraction, "Per-class training fraction")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("--out", out_path, "Manifest path (samples go to <stem>.jsonl)")->required();

  // descriptors
  auto* desc = app.add_subcommand("descriptors", "Compute the descriptor cache of a dataset");
  std::string data_path;
  std::optional<double> eps;
  desc->add_option("--data", data_path, "Dataset manifest")->required();
  desc->add_option("--eps", eps, "Log regularization (default: relative)");
  desc->add_option("--out", out_path, "Output JSON (default: stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Accuracy-versus-nu experiment");
  std::string config_path;
  std::vector<std::string> methods;
  std::vector<int> nus;
  int reps = 0;
  double svm_c = 0.0;
  int jobs = 1;
  bool timing = false;
  sweep->add_option("--data", data_path, "Dataset manifest")->required();
  sweep->add_option("--config", config_path, "JSON experiment config");
  sweep->add_option("--method", methods, "Method(s), or 'all'");
  sweep->add_option("--nu", nus, "Feature dimensionalities");
  sweep->add_option("--reps", reps, "Repetitions per nu");
  sweep->add_option("--seed", seed, "Random seed");
  sweep->add_option("--sigma", sigma, "Kernel bandwidth");
  sweep->add_option("--theta", theta, "Degree distribution parameter");
  sweep->add_option("--c", svm_c, "SVM regularization");
  sweep->add_option("--eps", eps, "Log regularization");
  sweep->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  sweep->add_flag("--timing", timing, "Record wall-clock training time");
  sweep->add_option("--out", out_path, "Report path (default: stdout)");
  sweep->add_option("--format", format, "csv or json")->capture_default_str();

  // validate
  auto* validate = app.add_subcommand("validate", "Run the Monte-Carlo theory checks");
  int mc_reps = 20000;
  int val_nu = 1;
  int dim = 4;
  int pairs = 5;
  validate->add_option("--reps", mc_reps, "Monte-Carlo repetitions (>= 1000)")->capture_default_str();
  validate->add_option("--nu", val_nu, "Feature dimensionality for the variance check")->capture_default_str();
  validate->add_option("--dim", dim, "Matrix side d")->capture_default_str();
  validate->add_option("--pairs", pairs, "Random input pairs")->capture_default_str();
  validate->add_option("--seed", seed, "Random seed")->capture_default_str();
  validate->add_option("--sigma", sigma, "Kernel bandwidth")->capture_default_str();
  validate->add_option("--theta", theta, "Degree distribution parameter")->capture_default_str();
  validate->add_option("--out", out_path, "Verdict JSON (default: stdout)");

  // train
  auto* train = app.add_subcommand("train", "Train a single model");
  std::string method_name = "kron_pi";
  double c = 1.0;
  int mlp_epochs = 200;
  int train_nu = 1000;
  train->add_option("--data", data_path, "Dataset manifest")->required();
  train->add_option("--method", method_name, "Method")->capture_default_str();
  train->add_option("--nu", train_nu, "Feature dimensionality")->capture_default_str();
  train->add_option("--seed", seed, "Random seed")->capture_default_str();
  train->add_option("--sigma", sigma, "Kernel bandwidth")->capture_default_str();
  train->add_option("--theta", theta, "Degree distribution parameter")->capture_default_str();
  train->add_option("--c", c, "SVM regularization")->capture_default_str();
  train->add_option("--eps", eps, "Log regularization");
  train->add_option("--mlp-epochs", mlp_epochs, "Epoch cap for perceptron")->capture_default_str();
  train->add_option("--out", out_path, "Model JSON")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "Predict with a trained model");
  std::string model_path;
  std::string split = "test";
  predict->add_option("--model", model_path, "Model JSON")->required();
  predict->add_option("--data", data_path, "Dataset manifest")->required();
  predict->add_option("--split", split, "train, test or all")->capture_default_str();
  predict->add_option("--out", out_path, "Predictions CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) {
      so.seed = seed;
      DatasetManifest m = synth_dataset(so);
      save_dataset(m, out_path);
      std::cerr << "wrote " << m.samples.size() << " samples to " << out_path << "\n";
    } else if (*desc) {
      const DatasetManifest m = load_dataset(data_path);
      std::vector<std::string> split_of(m.samples.size(), "none");
      for (int i : m.train_indices) split_of[i] = "train";
      for (int i : m.test_indices) split_of[i] = "test";
      json items = json::array();
      json failures = json::array();
      for (std::size_t i = 0; i < m.samples.size(); ++i) {
        try {
          const LogCovDescriptor d = make_descriptor(m.samples[i], eps);
          items.push_back({{"index", i}, {"label", m.samples[i].label()}, {"split", split_of[i]},
                           {"descriptor", matrix_to_json(d.matrix())}});
        } catch (const DescriptorError& e) {
          std::cerr << "skipping sample " << i << ": " << e.what() << "\n";
          failures.push_back({{"index", i}, {"label", e.label()}, {"error", e.what()}});
        }
      }
      json doc{{"format_version", 1}, {"dataset", m.name}, {"eps", eps ? json(*eps) : json(nullptr)},
               {"descriptors", items}, {"failures", failures}};
      write_text(out_path, doc.dump() + "\n");
    } else if (*sweep) {
      ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
      if (!methods.empty()) {
        cfg.methods.clear();
        for (const auto& name : methods) {
          if (name == "all") {
            cfg.methods = all_methods();
            break;
          }
          cfg.methods.push_back(parse_method(name));
        }
      }
      if (!nus.empty()) cfg.nus = nus;
      if (sweep->count("--reps")) cfg.repetitions = reps;
      if (sweep->count("--seed")) cfg.seed = seed;
      if (sweep->count("--sigma")) cfg.sigma = sigma;
      if (sweep->count("--theta")) cfg.theta = theta;
      if (sweep->count("--c")) cfg.svm_c = svm_c;
      if (eps) cfg.eps = eps;
      if (sweep->count("--jobs")) cfg.jobs = jobs;
      if (timing) cfg.timing = true;
      const ReportFormat fmt = parse_report_format(format);
      const ExperimentReport report = run_sweep(load_dataset(data_path), cfg);
      for (const auto& s : report.skipped_samples) std::cerr << "skipped " << s << "\n";
      if (out_path.empty() || out_path == "-")
        std::cout << render_report(report, fmt);
      else
        emit_report(report, out_path, fmt);
    } else if (*validate) {
      const RbfParams p{sigma};
      const DegreeDistribution rho{theta};
      p.validate();
      rho.validate();
      std::mt19937_64 pair_rng(sub_seed(seed, 0x9a125ULL));
      std::vector<std::pair<Matrix, Matrix>> xy;
      for (int k = 0; k < pairs; ++k) {
        Matrix x = random_unit_upper(dim, pair_rng);
        Matrix y = random_unit_upper(dim, pair_rng);
        xy.emplace_back(std::move(x), std::move(y));
      }
      bool all_ok = true;
      json checks = json::array();
      const MapKind kinds[] = {MapKind::kron_pi, MapKind::kron_e, MapKind::taylor, MapKind::fourier, MapKind::fastfood};
      for (MapKind kind : kinds) {
        const bool matrix_in = takes_matrix_input(kind);
        const int input_dim = matrix_in ? dim : dim * dim;
        const int kind_nu = kind == MapKind::fastfood ? next_pow2(input_dim) : val_nu;
        std::optional<double> bound;
        if (kind == MapKind::kron_pi || kind == MapKind::kron_e) {
          const double b = variance_bound(kind, kind_nu, p, rho);
          if (std::isfinite(b)) bound = b;
        }
        for (int k = 0; k < pairs; ++k) {
          const MapFactory factory = [&](std::uint64_t s) {
            MapSpec spec;
            spec.kind = kind;
            spec.nu = kind_nu;
            spec.input_dim = input_dim;
            spec.sigma = sigma;
            spec.theta = theta;
            spec.seed = s;
            return sample_map(spec);
          };
          McOptions mo;
          mo.seed = sub_seed(seed, static_cast<std::uint64_t>(k) * 16 + static_cast<std::uint64_t>(kind));
          mo.variance_bound = bound;
          const McResult r = mc_bias_variance(factory, xy[k].first, xy[k].second, mc_reps, p, mo);
          const bool ok = r.unbiased && r.within_bound.value_or(true);
          all_ok = all_ok && ok;
          json j = to_json(r);
          j["kind"] = to_string(kind);
          j["nu"] = kind_nu;
          j["pair"] = k;
          j["pass"] = ok;
          checks.push_back(std::move(j));
          if (!ok)
            std::cerr << "FAIL " << to_string(kind) << " pair " << k << ": z=" << r.z_score << "\n";
        }
      }
      const std::vector<double> eps_values{0.01, 0.1, 1.0};
      json doc{{"pass", all_ok},
               {"checks", checks},
               {"c_rho", to_json(c_rho(rho))},
               {"bounds", to_json(make_bound_report(val_nu, p, rho, eps_values))}};
      write_text(out_path, doc.dump(2) + "\n");
      return all_ok ? 0 : kExitVerdict;
    } else if (*train) {
      const DatasetManifest m = load_dataset(data_path);
      m.validate_supervised();
      const Method method = parse_method(method_name);
      const SplitSel tr = descriptors_for(m, m.train_indices, eps);
      Pipeline pl = train_pipeline(method, train_nu, tr.x, tr.y, sigma, theta, c, seed, mlp_epochs);
      pl.eps = eps;
      save_pipeline(pl, out_path);
      const SplitSel te = descriptors_for(m, m.test_indices, eps);
      std::printf("train_accuracy %.6f\ntest_accuracy %.6f\n", accuracy(pl.predict(tr.x), tr.y),
                  accuracy(pl.predict(te.x), te.y));
    } else if (*predict) {
      const Pipeline pl = load_pipeline(model_path);
      const DatasetManifest m = load_dataset(data_path);
      std::vector<int> idx;
      if (split == "train")
        idx = m.train_indices;
      else if (split == "test")
        idx = m.test_indices;
      else if (split == "all")
        for (int i = 0; i < static_cast<int>(m.samples.size()); ++i) idx.push_back(i);
      else
        throw ContractError("--split must be train, test or all");
      const SplitSel s = descriptors_for(m, idx, pl.eps);
      const auto pred = pl.predict(s.x);
      std::string csv = "index,label,predicted\n";
      for (std::size_t i = 0; i < pred.size(); ++i)
        csv += std::to_string(s.index[i]) + "," + s.y[i] + "," + pred[i] + "\n";
      write_text(out_path, csv);
      std::fprintf(stderr, "accuracy %.6f\n", accuracy(pred, s.y));
    }
  } catch (const DescriptorError& e) {
    std::cerr << "descriptor error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
