#include "kronfeat/dataset.hpp"
#include "kronfeat/descriptor.hpp"
#include "kronfeat/errors.hpp"
#include "kronfeat/featmap.hpp"
#include "kronfeat/learn.hpp"
#include "kronfeat/linalg.hpp"
#include "kronfeat/perceptron.hpp"
#include "kronfeat/stats.hpp"
#include "kronfeat/sweep.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace kronfeat;

namespace {

SkeletonSequence sequence_from_array(const std::string& label, py::array_t<double, py::array::c_style | py::array::forcecast> joints,
                                     int root) {
  if (joints.ndim() != 3 || joints.shape(2) != 3) throw ContractError("joints must have shape (T, J, 3)");
  const auto t = static_cast<int>(joints.shape(0));
  const auto j = static_cast<int>(joints.shape(1));
  std::vector<double> coords(joints.data(), joints.data() + joints.size());
  return SkeletonSequence(label, t, j, std::move(coords), root);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Kronecker-product random feature maps for covariance descriptors";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto contract = py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<TooLargeError>(m, "TooLargeError", contract.ptr());
  auto numeric = py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", numeric.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", numeric.ptr());
  py::register_exception<DescriptorError>(m, "DescriptorError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());

  m.def("sym_eigh", [](const Matrix& a) {
    const EigenDecomposition e = eigh(SymMatrix(a));
    return py::make_tuple(e.eigenvalues, e.eigenvectors);
  }, py::arg("a"), "Eigenvalues (ascending) and eigenvectors of an exactly symmetric matrix.");
  m.def("sym_log", [](const Matrix& a, std::optional<double> eps) {
    const SymMatrix s(a);
    return sym_log(s, eps ? *eps : default_log_eps(eigh(s))).matrix();
  }, py::arg("a"), py::arg("eps") = py::none());
  m.def("kron_trace", [](const std::vector<Matrix>& ws, const Matrix& x) { return kron_trace(ws, x); },
        py::arg("weights"), py::arg("x"));

  m.def("log_cov_descriptor", [](py::array_t<double, py::array::c_style | py::array::forcecast> joints, int root,
                                 std::optional<double> eps) {
    return make_descriptor(sequence_from_array("sample", joints, root), eps).matrix();
  }, py::arg("joints"), py::arg("root") = 0, py::arg("eps") = py::none(),
        "Upper-triangular unit-norm log-covariance descriptor of a (T, J, 3) sequence.");

  m.def("rbf_exact", [](const Matrix& x, const Matrix& y, double sigma) { return rbf_exact(x, y, RbfParams{sigma}); },
        py::arg("x"), py::arg("y"), py::arg("sigma") = 1.0);

  py::class_<FeatureMapModel>(m, "FeatureMap")
      .def_property_readonly("kind", [](const FeatureMapModel& f) { return std::string(to_string(f.kind())); })
      .def_property_readonly("nu", &FeatureMapModel::nu)
      .def_property_readonly("input_dim", &FeatureMapModel::input_dim)
      .def("apply", [](const FeatureMapModel& f, const Matrix& x) { return f.apply(x); }, py::arg("x"))
      .def("apply_batch", [](const FeatureMapModel& f, const std::vector<Matrix>& xs) { return f.apply_batch(xs); },
           py::arg("xs"));

  m.def("sample_map", [](const std::string& kind, int nu, int input_dim, double sigma, double theta, std::uint64_t seed,
                         std::optional<int> forced_degree) {
    MapSpec s;
    s.kind = parse_map_kind(kind);
    s.nu = nu;
    s.input_dim = input_dim;
    s.sigma = sigma;
    s.theta = theta;
    s.seed = seed;
    s.forced_degree = forced_degree;
    return sample_map(s);
  }, py::arg("kind"), py::arg("nu"), py::arg("input_dim"), py::arg("sigma") = 1.0, py::arg("theta") = 0.9,
        py::arg("seed") = 0, py::arg("forced_degree") = py::none());

  m.def("c_rho", [](double theta) {
    const CRhoResult r = c_rho(DegreeDistribution{theta});
    return py::dict(py::arg("series") = r.series, py::arg("closed_form") = r.closed_form, py::arg("terms") = r.terms,
                    py::arg("diverged") = r.diverged);
  }, py::arg("theta"));
  m.def("variance_bound", [](const std::string& kind, int nu, double sigma, double theta) {
    return variance_bound(parse_map_kind(kind), nu, RbfParams{sigma}, DegreeDistribution{theta});
  }, py::arg("kind"), py::arg("nu"), py::arg("sigma") = 1.0, py::arg("theta") = 0.9);

  py::class_<LinearSvmModel>(m, "LinearSvm")
      .def_readonly("classes", &LinearSvmModel::classes)
      .def_readonly("weights", &LinearSvmModel::weights)
      .def_readonly("bias", &LinearSvmModel::bias)
      .def("predict", [](const LinearSvmModel& s, const Matrix& f) { return predict_linear(s, f); }, py::arg("features"));
  m.def("train_linear_svm", [](const Matrix& f, const std::vector<std::string>& labels, double c, std::uint64_t seed) {
    return train_linear_svm(f, labels, SvmOptions{c, 1e-4, 1000, seed});
  }, py::arg("features"), py::arg("labels"), py::arg("c") = 1.0, py::arg("seed") = 0);

  m.def("radial_descriptors", [](int classes, int per_class, int d, std::uint64_t seed, std::uint64_t pole_seed) {
    RadialOptions o;
    o.classes = classes;
    o.per_class = per_class;
    o.d = d;
    o.seed = seed;
    o.pole_seed = pole_seed;
    DescriptorSet s = radial_descriptors(o);
    return py::make_tuple(s.inputs, s.labels);
  }, py::arg("classes") = 5, py::arg("per_class") = 40, py::arg("d") = 4, py::arg("seed") = 0,
     py::arg("pole_seed") = 0);

  m.def("sweep", [](const std::string& manifest_path, const std::vector<std::string>& methods, const std::vector<int>& nus,
                    int repetitions, std::uint64_t seed, const std::string& format) {
    ExperimentConfig cfg;
    cfg.methods.clear();
    for (const auto& name : methods) cfg.methods.push_back(parse_method(name));
    cfg.nus = nus;
    cfg.repetitions = repetitions;
    cfg.seed = seed;
    return render_report(run_sweep(load_dataset(manifest_path), cfg), parse_report_format(format));
  }, py::arg("manifest"), py::arg("methods"), py::arg("nus"), py::arg("repetitions") = 1, py::arg("seed") = 0,
        py::arg("format") = "json", "Runs a sweep and returns the rendered report.");
}
