#include "kronfeat/dataset.hpp"

#include "kronfeat/errors.hpp"
#include "kronfeat/labels.hpp"
#include "kronfeat/random.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace kronfeat {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SkeletonSequence parse_sample(const json& rec, int root_index, const std::string& where) {
  if (!rec.is_object()) throw DataError(where + ": record is not a JSON object");
  if (!rec.contains("label")) throw DataError(where + ": missing \"label\"");
  if (!rec.contains("joints") || !rec["joints"].is_array()) throw DataError(where + ": missing \"joints\" array");
  const json& lab = rec["label"];
  std::string label;
  if (lab.is_string())
    label = lab.get<std::string>();
  else if (lab.is_number_integer())
    label = std::to_string(lab.get<long long>());
  else
    throw DataError(where + ": \"label\" must be a string or an integer");

  const json& frames = rec["joints"];
  const int t_count = static_cast<int>(frames.size());
  int j_count = -1;
  std::vector<double> coords;
  for (int t = 0; t < t_count; ++t) {
    const json& frame = frames[t];
    if (!frame.is_array()) throw DataError(where + ": frame " + std::to_string(t) + " is not an array");
    if (j_count < 0) j_count = static_cast<int>(frame.size());
    if (static_cast<int>(frame.size()) != j_count)
      throw DataError(where + ": frame " + std::to_string(t) + " has a different joint count");
    for (const json& joint : frame) {
      if (!joint.is_array() || joint.size() != 3)
        throw DataError(where + ": frame " + std::to_string(t) + " has a joint that is not an [x, y, z] triple");
      for (const json& c : joint) {
        if (!c.is_number()) throw DataError(where + ": non-numeric coordinate");
        coords.push_back(c.get<double>());
      }
    }
  }
  try {
    return SkeletonSequence(label, t_count, std::max(j_count, 0), std::move(coords), root_index);
  } catch (const ContractError& e) {
    throw DataError(where + ": invalid sample: " + e.what());
  }
}

std::vector<int> parse_indices(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw DataError("manifest: \"" + what + "\" must be an array of indices");
  std::vector<int> out;
  for (const json& v : arr) {
    if (!v.is_number_integer()) throw DataError("manifest: \"" + what + "\" contains a non-integer entry");
    out.push_back(v.get<int>());
  }
  return out;
}

void stratified_split(DatasetManifest& m, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DataError("split_rule: train_fraction must lie in (0, 1)");
  std::map<std::string, std::vector<int>> by_class;
  for (int i = 0; i < static_cast<int>(m.samples.size()); ++i) by_class[m.samples[i].label()].push_back(i);
  m.train_indices.clear();
  m.test_indices.clear();
  for (const auto& [label, idx] : by_class) {
    const auto n_train = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < idx.size(); ++k) (k < n_train ? m.train_indices : m.test_indices).push_back(idx[k]);
  }
  std::sort(m.train_indices.begin(), m.train_indices.end());
  std::sort(m.test_indices.begin(), m.test_indices.end());
}

}  // namespace

void DatasetManifest::validate() const {
  const int n = static_cast<int>(samples.size());
  std::set<int> seen;
  auto check = [&](const std::vector<int>& idx, const char* which) {
    for (int i : idx) {
      if (i < 0 || i >= n)
        throw DataError(std::string("dataset '") + name + "': " + which + " index " + std::to_string(i) +
                        " out of range [0, " + std::to_string(n) + ")");
      if (!seen.insert(i).second)
        throw DataError(std::string("dataset '") + name + "': sample " + std::to_string(i) +
                        " appears twice in the splits");
    }
  };
  check(train_indices, "train");
  check(test_indices, "test");
}

void DatasetManifest::validate_supervised() const {
  validate();
  std::set<std::string> all, train, test;
  for (const auto& s : samples) all.insert(s.label());
  for (int i : train_indices) train.insert(samples[i].label());
  for (int i : test_indices) test.insert(samples[i].label());
  for (const auto& c : all) {
    if (!train.count(c)) throw DataError("dataset '" + name + "': class '" + c + "' has no training sample");
    if (!test.count(c)) throw DataError("dataset '" + name + "': class '" + c + "' has no test sample");
  }
}

std::vector<std::string> DatasetManifest::labels() const {
  std::vector<std::string> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label());
  return out;
}

std::vector<SkeletonSequence> load_samples_jsonl(const std::filesystem::path& path, int root_index) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<SkeletonSequence> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": parse error: " + e.what());
    }
    out.push_back(parse_sample(rec, root_index, where + " (sample " + std::to_string(out.size()) + ")"));
  }
  if (out.empty()) throw DataError(path.string() + ": parse error: no sample records");
  return out;
}

DatasetManifest load_dataset(const std::filesystem::path& manifest_path) {
  const std::string text = read_file(manifest_path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(manifest_path.string() + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw DataError(manifest_path.string() + ": manifest must be a JSON object");

  DatasetManifest m;
  m.name = doc.value("name", manifest_path.stem().string());
  m.format_version = doc.value("format_version", kDatasetFormatVersion);
  if (m.format_version != kDatasetFormatVersion)
    throw DataError(manifest_path.string() + ": unsupported format_version " + std::to_string(m.format_version));
  m.root_index = doc.value("root_index", 0);
  if (!doc.contains("samples") || !doc["samples"].is_string())
    throw DataError(manifest_path.string() + ": missing \"samples\" path");
  const std::filesystem::path samples_path = manifest_path.parent_path() / doc["samples"].get<std::string>();
  m.samples = load_samples_jsonl(samples_path, m.root_index);

  if (doc.contains("split")) {
    const json& split = doc["split"];
    if (!split.is_object()) throw DataError(manifest_path.string() + ": \"split\" must be an object");
    m.train_indices = parse_indices(split.value("train", json::array()), "split.train");
    m.test_indices = parse_indices(split.value("test", json::array()), "split.test");
  } else if (doc.contains("split_rule")) {
    const json& rule = doc["split_rule"];
    if (rule.value("kind", "") != "stratified_fraction")
      throw DataError(manifest_path.string() + ": unknown split_rule kind");
    stratified_split(m, rule.value("train_fraction", 0.5));
  }
  m.validate();
  return m;
}

void save_dataset(const DatasetManifest& m, const std::filesystem::path& manifest_path) {
  m.validate();
  std::filesystem::path samples_path = manifest_path;
  samples_path.replace_extension(".jsonl");
  {
    std::ofstream out(samples_path);
    if (!out) throw DataError("cannot write '" + samples_path.string() + "'");
    for (const auto& s : m.samples) {
      json frames = json::array();
      for (int t = 0; t < s.num_frames(); ++t) {
        json frame = json::array();
        for (int j = 0; j < s.num_joints(); ++j) frame.push_back({s.at(t, j, 0), s.at(t, j, 1), s.at(t, j, 2)});
        frames.push_back(std::move(frame));
      }
      out << json{{"label", s.label()}, {"joints", std::move(frames)}}.dump() << '\n';
    }
  }
  json doc{{"name", m.name},
           {"format_version", m.format_version},
           {"root_index", m.root_index},
           {"samples", samples_path.filename().string()},
           {"split", {{"train", m.train_indices}, {"test", m.test_indices}}}};
  std::ofstream out(manifest_path);
  if (!out) throw DataError("cannot write '" + manifest_path.string() + "'");
  out << doc.dump(2) << '\n';
}

DatasetManifest synth_dataset(const SynthOptions& opts) {
  if (opts.classes < 2) throw ContractError("synth_dataset: need at least 2 classes");
  if (opts.per_class < 1) throw ContractError("synth_dataset: per_class must be >= 1");
  if (opts.joints < 2) throw ContractError("synth_dataset: need at least 2 joints");
  if (opts.t_min < 2 || opts.t_max < opts.t_min) throw ContractError("synth_dataset: invalid frame range");
  if (!(opts.noise >= 0.0)) throw ContractError("synth_dataset: noise must be >= 0");

  const int coords_per_frame = 3 * opts.joints;
  const int basis = 3 * (opts.joints - 1) + 1;
  std::vector<Matrix> amplitude(opts.classes);
  std::vector<Vector> phase(opts.classes);
  for (int c = 0; c < opts.classes; ++c) {
    Rng rng = make_rng(sub_seed(opts.seed, 0x9607ULL), static_cast<std::uint64_t>(c));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uphase(0.0, 2.0 * std::numbers::pi);
    amplitude[c].resize(coords_per_frame, basis);
    for (Eigen::Index e = 0; e < amplitude[c].size(); ++e) amplitude[c].data()[e] = normal(rng);
    phase[c].resize(basis);
    for (int k = 0; k < basis; ++k) phase[c](k) = uphase(rng);
  }

  DatasetManifest m;
  m.name = "synthetic";
  for (int c = 0; c < opts.classes; ++c) {
    for (int s = 0; s < opts.per_class; ++s) {
      const int index = c * opts.per_class + s;
      Rng rng = make_rng(sub_seed(opts.seed, 0x5a3bULL), static_cast<std::uint64_t>(index));
      std::uniform_int_distribution<int> length(opts.t_min, opts.t_max);
      std::normal_distribution<double> normal(0.0, 1.0);
      const int t_count = length(rng);
      const Eigen::Vector3d shift(normal(rng), normal(rng), normal(rng));
      std::vector<double> coords(static_cast<std::size_t>(t_count) * coords_per_frame);
      for (int t = 0; t < t_count; ++t) {
        const double u = static_cast<double>(t) / (t_count - 1);
        Vector waves(basis);
        for (int k = 0; k < basis; ++k) waves(k) = std::sin(2.0 * std::numbers::pi * (0.5 + 0.5 * k) * u + phase[c](k));
        const Vector pose = amplitude[c] * waves;
        for (int i = 0; i < coords_per_frame; ++i) {
          const double jitter = opts.noise > 0.0 ? opts.noise * normal(rng) : 0.0;
          coords[static_cast<std::size_t>(t) * coords_per_frame + i] = pose(i) + shift(i % 3) + jitter;
        }
      }
      m.samples.emplace_back("class" + std::to_string(c), t_count, opts.joints, std::move(coords), 0);
    }
  }
  stratified_split(m, opts.train_fraction);
  m.validate();
  return m;
}

DescriptorSet radial_descriptors(const RadialOptions& opts) {
  if (opts.classes < 2) throw ContractError("radial_descriptors: need at least 2 classes");
  if (opts.per_class < 1 || opts.d < 2) throw ContractError("radial_descriptors: invalid size");
  if (!(opts.margin >= 0.0 && opts.margin < 0.5)) throw ContractError("radial_descriptors: margin must be in [0, 0.5)");
  const int d = opts.d;
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_upper = [&](Rng& rng) {
    Matrix m = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i <= j; ++i) m(i, j) = normal(rng);
    return m;
  };

  Rng pole_rng = make_rng(sub_seed(opts.pole_seed, 0x701eULL), 0);
  Matrix pole = random_upper(pole_rng);
  pole /= pole.norm();

  DescriptorSet out;
  const double band = std::numbers::pi / opts.classes;
  for (int c = 0; c < opts.classes; ++c) {
    for (int s = 0; s < opts.per_class; ++s) {
      Rng rng = make_rng(sub_seed(opts.seed, 0x7ad1ULL), static_cast<std::uint64_t>(c * opts.per_class + s));
      std::uniform_real_distribution<double> where(band * (c + opts.margin), band * (c + 1 - opts.margin));
      const double angle = where(rng);
      Matrix dir = random_upper(rng);
      dir -= frob_inner(dir, pole) * pole;
      dir /= dir.norm();
      Matrix x = std::cos(angle) * pole + std::sin(angle) * dir;
      x /= x.norm();
      out.inputs.push_back(std::move(x));
      out.labels.push_back("shell" + std::to_string(c));
    }
  }
  return out;
}

}  // namespace kronfeat
