#include "kronfeat/sweep.hpp"

#include "kronfeat/errors.hpp"
#include "kronfeat/labels.hpp"
#include "kronfeat/learn.hpp"
#include "kronfeat/perceptron.hpp"
#include "kronfeat/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace kronfeat {

using nlohmann::json;

namespace {

constexpr std::string_view kMethodNames[] = {"kron_pi", "kron_e", "fourier", "taylor", "fastfood", "perceptron", "exact"};

struct Cell {
  Method method;
  int nu;
  int repetition;
};

struct SplitData {
  std::vector<Matrix> train_x, test_x;
  std::vector<std::string> train_y, test_y;
};

SplitData build_split(const DatasetManifest& manifest, const ExperimentConfig& cfg, ExperimentReport& report) {
  const int n = static_cast<int>(manifest.samples.size());
  std::vector<std::optional<Matrix>> desc(n);
  int failures = 0;
  auto compute = [&](const std::vector<int>& idx) {
    for (int i : idx) {
      try {
        desc[i] = make_descriptor(manifest.samples[i], cfg.eps).matrix();
      } catch (const Error& e) {
        ++failures;
        report.skipped_samples.push_back("sample " + std::to_string(i) + " (" + manifest.samples[i].label() + "): " +
                                         e.what());
      }
    }
  };
  compute(manifest.train_indices);
  compute(manifest.test_indices);
  const int used = static_cast<int>(manifest.train_indices.size() + manifest.test_indices.size());
  if (used > 0 && 10 * failures > used)
    throw DataError("sweep aborted: " + std::to_string(failures) + " of " + std::to_string(used) +
                    " descriptors failed; first: " + report.skipped_samples.front());

  SplitData s;
  for (int i : manifest.train_indices)
    if (desc[i]) {
      s.train_x.push_back(*desc[i]);
      s.train_y.push_back(manifest.samples[i].label());
    }
  for (int i : manifest.test_indices)
    if (desc[i]) {
      s.test_x.push_back(*desc[i]);
      s.test_y.push_back(manifest.samples[i].label());
    }
  if (sorted_classes(s.train_y).size() < 2) throw DataError("sweep: fewer than 2 classes left in the training split");
  if (s.test_x.empty()) throw DataError("sweep: empty test split");
  return s;
}

// Fastfood features for a ν that is not a whole number of blocks: sample
// enough blocks, keep the first ν features and rescale so each keeps the
// √(2/ν) normalization.
Matrix fastfood_features(int nu, int dim, const RbfParams& p, std::uint64_t seed, std::span<const Matrix> xs) {
  const int dp = next_pow2(dim);
  const int full = (nu + dp - 1) / dp * dp;
  const FeatureMapModel map = sample_fastfood(full, dim, p, seed);
  Matrix f = map.apply_batch(xs);
  if (full == nu) return f;
  return f.leftCols(nu) * std::sqrt(static_cast<double>(full) / nu);
}

ExperimentRow run_cell(const Cell& cell, const SplitData& data, const ExperimentConfig& cfg) {
  ExperimentRow row{cell.method, cell.nu, cell.repetition, cell_seed(cfg.seed, cell.nu, cell.repetition), 0.0, {}, {}};
  const RbfParams p{cfg.sigma};
  const DegreeDistribution rho{cfg.theta};
  const SvmOptions svm{cfg.svm_c, 1e-4, 1000, row.seed};
  const int d = static_cast<int>(data.train_x.front().rows());
  const int dim = d * d;

  if (cell.method == Method::fastfood && cell.nu < next_pow2(dim)) {
    row.skip_reason = "nu below the padded input dimension " + std::to_string(next_pow2(dim));
    return row;
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> predicted;
  if (cell.method == Method::exact) {
    const KernelSvmModel model = train_kernel_svm(data.train_x, data.train_y, p, svm);
    predicted = predict_kernel(model, data.test_x);
  } else {
    Matrix train_f, test_f;
    switch (cell.method) {
      case Method::fastfood:
        train_f = fastfood_features(cell.nu, dim, p, row.seed, data.train_x);
        test_f = fastfood_features(cell.nu, dim, p, row.seed, data.test_x);
        break;
      case Method::perceptron: {
        MlpConfig mc;
        mc.hidden_size = cell.nu;
        mc.max_epochs = cfg.mlp_epochs;
        mc.seed = row.seed;
        const FeatureMapModel map = extract_phi_p(train_mlp(data.train_x, data.train_y, mc));
        train_f = map.apply_batch(data.train_x);
        test_f = map.apply_batch(data.test_x);
        break;
      }
      default: {
        MapSpec spec;
        spec.kind = static_cast<MapKind>(static_cast<int>(cell.method));
        spec.nu = cell.nu;
        spec.input_dim = takes_matrix_input(spec.kind) ? d : dim;
        spec.sigma = p.sigma;
        spec.theta = rho.theta;
        spec.seed = row.seed;
        const FeatureMapModel map = sample_map(spec);
        train_f = map.apply_batch(data.train_x);
        test_f = map.apply_batch(data.test_x);
      }
    }
    const LinearSvmModel model = train_linear_svm(train_f, data.train_y, svm);
    predicted = predict_linear(model, test_f);
  }
  if (cfg.timing) row.train_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  row.test_accuracy = accuracy(predicted, data.test_y);
  return row;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fixed6(const std::optional<double>& v) { return v ? fixed6(*v) : "NA"; }

json optional_number(const std::optional<double>& v) { return v ? json(round6(*v)) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

std::string_view to_string(Method m) { return kMethodNames[static_cast<int>(m)]; }

Method parse_method(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kMethodNames); ++i)
    if (kMethodNames[i] == name) return static_cast<Method>(i);
  throw ContractError("unknown method '" + std::string(name) +
                      "' (expected kron_pi, kron_e, fourier, taylor, fastfood, perceptron or exact)");
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (std::size_t i = 0; i < std::size(kMethodNames); ++i) out.push_back(static_cast<Method>(i));
  return out;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ContractError("config: at least one method is required");
  if (nus.empty()) throw ContractError("config: nus must not be empty");
  for (std::size_t i = 0; i < nus.size(); ++i) {
    if (nus[i] < 1) throw ContractError("config: every nu must be >= 1");
    if (i > 0 && nus[i] <= nus[i - 1]) throw ContractError("config: nus must be strictly ascending");
  }
  if (repetitions < 1) throw ContractError("config: repetitions must be >= 1");
  RbfParams{sigma}.validate();
  DegreeDistribution{theta}.validate();
  SvmOptions{svm_c, 1e-4, 1000, 0}.validate();
  if (eps && !(*eps >= 0.0)) throw ContractError("config: eps must be >= 0");
  if (mlp_epochs < 1) throw ContractError("config: mlp_epochs must be >= 1");
  if (jobs < 1) throw ContractError("config: jobs must be >= 1");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": parse error at byte " + std::to_string(e.byte));
  }
  ExperimentConfig cfg;
  try {
    if (doc.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : doc["methods"]) cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (doc.contains("method")) cfg.methods = {parse_method(doc["method"].get<std::string>())};
    if (doc.contains("nus")) cfg.nus = doc["nus"].get<std::vector<int>>();
    cfg.repetitions = doc.value("repetitions", cfg.repetitions);
    cfg.sigma = doc.value("sigma", cfg.sigma);
    cfg.theta = doc.value("theta", cfg.theta);
    cfg.svm_c = doc.value("svm_c", cfg.svm_c);
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("eps") && !doc["eps"].is_null()) cfg.eps = doc["eps"].get<double>();
    cfg.mlp_epochs = doc.value("mlp_epochs", cfg.mlp_epochs);
    cfg.jobs = doc.value("jobs", cfg.jobs);
    cfg.timing = doc.value("timing", cfg.timing);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": invalid config value: " + e.what());
  }
  return cfg;
}

std::uint64_t cell_seed(std::uint64_t seed, int nu, int repetition) {
  return sub_seed(sub_seed(seed, static_cast<std::uint64_t>(nu)), static_cast<std::uint64_t>(repetition));
}

ExperimentReport run_sweep(const DatasetManifest& manifest, const ExperimentConfig& cfg) {
  cfg.validate();
  manifest.validate_supervised();
  ExperimentReport report;
  const SplitData data = build_split(manifest, cfg, report);

  std::vector<Cell> cells;
  for (Method m : cfg.methods) {
    if (m == Method::exact) {
      cells.push_back({m, 0, 0});
      continue;
    }
    for (int nu : cfg.nus)
      for (int r = 0; r < cfg.repetitions; ++r) cells.push_back({m, nu, r});
  }

  report.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        report.rows[i] = run_cell(cells[i], data, cfg);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cells.size();
      }
    }
  };
  const int threads = std::min<int>(cfg.jobs, static_cast<int>(cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  report.aggregates = aggregate(report.rows);
  return report;
}

std::vector<AggregateRow> aggregate(const std::vector<ExperimentRow>& rows) {
  std::vector<AggregateRow> out;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AggregateRow& a) { return a.method == r.method && a.nu == r.nu; });
    if (it == out.end()) {
      out.push_back({r.method, r.nu, std::nullopt, std::nullopt, 0});
      values.emplace_back();
      it = out.end() - 1;
    }
    if (r.test_accuracy) values[it - out.begin()].push_back(*r.test_accuracy);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& v = values[k];
    out[k].count = static_cast<int>(v.size());
    if (v.empty()) continue;
    double mean = 0.0;
    for (double a : v) mean += a;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double a : v) ss += (a - mean) * (a - mean);
    out[k].mean_accuracy = mean;
    out[k].std_accuracy = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return out;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw ContractError("unknown report format '" + std::string(name) + "' (expected csv or json)");
}

std::string render_report(const ExperimentReport& report, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::ostringstream out;
    out << "method,nu,repetition,seed,train_time_s,test_accuracy\n";
    for (const auto& r : report.rows)
      out << to_string(r.method) << ',' << r.nu << ',' << r.repetition << ',' << r.seed << ',' << fixed6(r.train_time_s)
          << ',' << fixed6(r.test_accuracy) << '\n';
    if (!report.aggregates.empty()) {
      out << "\n# aggregates\nmethod,nu,mean_accuracy,std_accuracy,count\n";
      for (const auto& a : report.aggregates)
        out << to_string(a.method) << ',' << a.nu << ',' << fixed6(a.mean_accuracy) << ',' << fixed6(a.std_accuracy)
            << ',' << a.count << '\n';
    }
    return out.str();
  }

  json rows = json::array();
  for (const auto& r : report.rows) {
    json j{{"method", to_string(r.method)},
           {"nu", r.nu},
           {"repetition", r.repetition},
           {"seed", r.seed},
           {"train_time_s", round6(r.train_time_s)},
           {"test_accuracy", optional_number(r.test_accuracy)}};
    if (!r.skip_reason.empty()) j["skip_reason"] = r.skip_reason;
    rows.push_back(std::move(j));
  }
  json aggs = json::array();
  for (const auto& a : report.aggregates)
    aggs.push_back({{"method", to_string(a.method)},
                    {"nu", a.nu},
                    {"mean_accuracy", optional_number(a.mean_accuracy)},
                    {"std_accuracy", optional_number(a.std_accuracy)},
                    {"count", a.count}});
  const json doc{{"rows", rows}, {"aggregates", aggs}, {"skipped_samples", report.skipped_samples}};
  return doc.dump(2) + "\n";
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& path, ReportFormat format) {
  const std::string text = render_report(report, format);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::filesystem::filesystem_error("cannot write report", path,
                                            std::make_error_code(std::errc::permission_denied));
  out << text;
  if (!out)
    throw std::filesystem::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
}

ExperimentReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report '" + path.string() + "'");
  ExperimentReport report;
  try {
    const json doc = json::parse(in);
    for (const auto& j : doc.at("rows")) {
      ExperimentRow r;
      r.method = parse_method(j.at("method").get<std::string>());
      r.nu = j.at("nu").get<int>();
      r.repetition = j.at("repetition").get<int>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.train_time_s = j.at("train_time_s").get<double>();
      r.test_accuracy = read_optional(j, "test_accuracy");
      r.skip_reason = j.value("skip_reason", "");
      report.rows.push_back(std::move(r));
    }
    for (const auto& j : doc.at("aggregates"))
      report.aggregates.push_back({parse_method(j.at("method").get<std::string>()), j.at("nu").get<int>(),
                                   read_optional(j, "mean_accuracy"), read_optional(j, "std_accuracy"),
                                   j.at("count").get<int>()});
    report.skipped_samples = doc.value("skipped_samples", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": invalid report: " + e.what());
  } catch (const ContractError& e) {
    throw DataError(path.string() + ": invalid report: " + e.what());
  }
  return report;
}

}  // namespace kronfeat
