#include "kronfeat/serialize.hpp"

#include "kronfeat/errors.hpp"

#include <cmath>
#include <fstream>

namespace kronfeat {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const json& j) {
  return guarded("matrix", [&] {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw DataError("matrix: data length does not match its shape");
    return Matrix(Eigen::Map<const Matrix>(data.data(), rows, cols));
  });
}

json map_to_json(const FeatureMapModel& m) {
  const MapSpec& s = m.spec();
  json j{{"version", kModelFormatVersion},
         {"kind", to_string(s.kind)},
         {"nu", s.nu},
         {"input_dim", s.input_dim},
         {"sigma", s.sigma},
         {"theta", s.theta},
         {"seed", s.seed},
         {"hyperparameters", {{"max_degree", s.max_degree}}}};
  if (s.forced_degree) j["hyperparameters"]["forced_degree"] = *s.forced_degree;
  if (s.kind == MapKind::perceptron) {
    const auto& p = m.perceptron_params();
    j["hyperparameters"]["keep_bias"] = p.keep_bias;
    j["hyperparameters"]["apply_sigmoid"] = p.apply_sigmoid;
    j["weights"] = matrix_to_json(p.weights);
    j["bias"] = matrix_to_json(p.bias);
  }
  return j;
}

FeatureMapModel map_from_json(const json& j) {
  return guarded("feature map", [&] {
    if (j.at("version").get<int>() != kModelFormatVersion) throw DataError("feature map: unsupported version");
    MapSpec s;
    s.kind = parse_map_kind(j.at("kind").get<std::string>());
    s.nu = j.at("nu").get<int>();
    s.input_dim = j.at("input_dim").get<int>();
    s.sigma = j.at("sigma").get<double>();
    s.theta = j.at("theta").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    const json& h = j.at("hyperparameters");
    s.max_degree = h.value("max_degree", s.max_degree);
    if (h.contains("forced_degree")) s.forced_degree = h["forced_degree"].get<int>();
    if (s.kind != MapKind::perceptron) return sample_map(s);
    PerceptronParams p{matrix_from_json(j.at("weights")), matrix_from_json(j.at("bias")).col(0),
                       h.value("keep_bias", false), h.value("apply_sigmoid", false)};
    return FeatureMapModel(s, std::move(p));
  });
}

std::vector<std::string> Pipeline::predict(std::span<const Matrix> inputs) const {
  if (kernel) return predict_kernel(*kernel, inputs);
  if (!map || !linear) throw ContractError("pipeline: no trained model");
  return predict_linear(*linear, map->apply_batch(inputs));
}

json pipeline_to_json(const Pipeline& p) {
  json j{{"version", kModelFormatVersion}, {"method", to_string(p.method)}, {"eps", nullptr}};
  if (p.eps) j["eps"] = *p.eps;
  if (p.kernel) {
    const auto& k = *p.kernel;
    json support = json::array();
    for (const auto& x : k.support_inputs) support.push_back(matrix_to_json(x));
    j["kernel_svm"] = {{"classes", k.classes},
                       {"dual_coefs", matrix_to_json(k.dual_coefs)},
                       {"support_inputs", support},
                       {"sigma", k.sigma},
                       {"c", k.c}};
  } else {
    if (!p.map || !p.linear) throw ContractError("pipeline: nothing to save");
    j["feature_map"] = map_to_json(*p.map);
    j["linear_svm"] = {{"classes", p.linear->classes},
                       {"weights", matrix_to_json(p.linear->weights)},
                       {"bias", matrix_to_json(p.linear->bias)},
                       {"c", p.linear->c}};
  }
  return j;
}

Pipeline pipeline_from_json(const json& j) {
  return guarded("model", [&] {
    if (j.at("version").get<int>() != kModelFormatVersion) throw DataError("model: unsupported version");
    Pipeline p;
    try {
      p.method = parse_method(j.at("method").get<std::string>());
    } catch (const ContractError& e) {
      throw DataError(std::string("model: ") + e.what());
    }
    if (!j.at("eps").is_null()) p.eps = j["eps"].get<double>();
    if (j.contains("kernel_svm")) {
      const json& k = j["kernel_svm"];
      KernelSvmModel m;
      m.classes = k.at("classes").get<std::vector<std::string>>();
      m.dual_coefs = matrix_from_json(k.at("dual_coefs"));
      for (const auto& x : k.at("support_inputs")) m.support_inputs.push_back(matrix_from_json(x));
      m.sigma = k.at("sigma").get<double>();
      m.c = k.at("c").get<double>();
      p.kernel = std::move(m);
    } else {
      p.map = map_from_json(j.at("feature_map"));
      const json& l = j.at("linear_svm");
      LinearSvmModel m;
      m.classes = l.at("classes").get<std::vector<std::string>>();
      m.weights = matrix_from_json(l.at("weights"));
      m.bias = matrix_from_json(l.at("bias")).col(0);
      m.c = l.at("c").get<double>();
      p.linear = std::move(m);
    }
    return p;
  });
}

void save_pipeline(const Pipeline& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model '" + path.string() + "'");
  out << pipeline_to_json(p).dump() << '\n';
}

Pipeline load_pipeline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": parse error at byte " + std::to_string(e.byte));
  }
  return pipeline_from_json(j);
}

json to_json(const CRhoResult& r) {
  return {{"series", finite_or_null(r.series)},
          {"closed_form", r.closed_form},
          {"terms", r.terms},
          {"diverged", r.diverged}};
}

json to_json(const BoundReport& r) {
  json cheb = json::array();
  for (const auto& row : r.chebyshev)
    cheb.push_back({{"eps", row.eps}, {"prob_kron_pi", row.prob_kron_pi}, {"prob_kron_e", row.prob_kron_e}});
  return {{"nu", r.nu},
          {"sigma", r.sigma},
          {"theta", r.theta},
          {"c_rho_series", finite_or_null(r.c_rho_series)},
          {"c_rho_closed_form", r.c_rho_closed_form},
          {"c_rho_diverged", r.c_rho_diverged},
          {"variance_bound_pi", finite_or_null(r.variance_bound_pi)},
          {"variance_bound_e", finite_or_null(r.variance_bound_e)},
          {"chebyshev", cheb}};
}

json to_json(const EstimatorStats& s) {
  return {{"mean", s.mean}, {"variance", s.variance}, {"stderr", s.std_error}, {"samples", s.samples}};
}

json to_json(const McResult& r) {
  json j{{"stats", to_json(r.stats)},
         {"target", r.target},
         {"z_score", finite_or_null(r.z_score)},
         {"unbiased", r.unbiased},
         {"variance_bound", nullptr},
         {"within_bound", nullptr}};
  if (r.bound) j["variance_bound"] = finite_or_null(*r.bound);
  if (r.within_bound) j["within_bound"] = *r.within_bound;
  return j;
}

}  // namespace kronfeat
