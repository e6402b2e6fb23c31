#pragma once

// Accuracy-versus-ν experiments: for every (method, ν, repetition) cell a
// fresh feature map is sampled, train and test descriptors are mapped, a
// linear SVM is trained and test accuracy recorded.

#include "kronfeat/dataset.hpp"
#include "kronfeat/featmap.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kronfeat {

enum class Method { kron_pi, kron_e, fourier, taylor, fastfood, perceptron, exact };

std::string_view to_string(Method m);
/// Throws ContractError for unknown names.
Method parse_method(std::string_view name);
/// Every method in declaration order.
std::vector<Method> all_methods();

struct ExperimentConfig {
  std::vector<Method> methods{Method::kron_pi};
  std::vector<int> nus{10, 20, 50, 100, 200, 500, 1000, 2000, 5000};
  int repetitions = 10;
  double sigma = 1.0;
  double theta = 0.9;
  double svm_c = 1.0;
  std::uint64_t seed = 0;
  /// Descriptor regularization; unset uses the default relative eps.
  std::optional<double> eps;
  /// Epoch cap for the perceptron method.
  int mlp_epochs = 200;
  /// Worker threads; results do not depend on this.
  int jobs = 1;
  /// Record wall-clock training time. Off by default so reports are
  /// byte-reproducible; train_time_s is then 0.
  bool timing = false;

  /// Throws ContractError on an empty method list, non-ascending or
  /// non-positive nus, repetitions < 1 or invalid hyperparameters.
  void validate() const;
};

/// Loads a JSON config; missing keys keep their defaults. Throws DataError.
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentRow {
  Method method = Method::kron_pi;
  int nu = 0;
  int repetition = 0;
  std::uint64_t seed = 0;
  double train_time_s = 0.0;
  /// Unset for skip rows.
  std::optional<double> test_accuracy;
  std::string skip_reason;
};

struct AggregateRow {
  Method method = Method::kron_pi;
  int nu = 0;
  /// Unset when every repetition was skipped.
  std::optional<double> mean_accuracy;
  std::optional<double> std_accuracy;
  int count = 0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  std::vector<AggregateRow> aggregates;
  /// Samples whose descriptor could not be computed, with the reason.
  std::vector<std::string> skipped_samples;
};

/// Seed of the (ν, repetition) cell; shared by all methods.
std::uint64_t cell_seed(std::uint64_t seed, int nu, int repetition);

/// Descriptor failures skip the sample; more than 10% failing throws
/// DataError with a summary. Requires a supervised-valid manifest.
ExperimentReport run_sweep(const DatasetManifest& manifest, const ExperimentConfig& cfg);

/// Recomputes aggregates (mean and sample standard deviation per
/// (method, ν), in row order) from the rows.
std::vector<AggregateRow> aggregate(const std::vector<ExperimentRow>& rows);

enum class ReportFormat { csv, json };
/// Throws ContractError for unknown names.
ReportFormat parse_report_format(std::string_view name);

/// CSV: six-column row table, a blank line, "# aggregates" and the aggregate
/// table; an empty report is the header only. JSON: sorted keys. Floats are
/// written with six decimals.
std::string render_report(const ExperimentReport& report, ReportFormat format);
/// Throws std::filesystem::filesystem_error on I/O failure.
void emit_report(const ExperimentReport& report, const std::filesystem::path& path, ReportFormat format);
/// Reads a JSON report. Throws DataError.
ExperimentReport load_report(const std::filesystem::path& path);

}  // namespace kronfeat
