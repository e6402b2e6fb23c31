#include "kronfeat/descriptor.hpp"

#include "kronfeat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kronfeat {

SkeletonSequence::SkeletonSequence(std::string label, int num_frames, int num_joints,
                                   std::vector<double> coords, int root_index)
    : label_(std::move(label)),
      frames_(num_frames),
      joints_(num_joints),
      coords_(std::move(coords)),
      root_(root_index) {
  const std::string who = "sequence '" + label_ + "': ";
  if (frames_ < 2) throw ContractError(who + "needs at least 2 frames, got " + std::to_string(frames_));
  if (joints_ < 2) throw ContractError(who + "needs at least 2 joints, got " + std::to_string(joints_));
  if (root_ < 0 || root_ >= joints_)
    throw ContractError(who + "root index " + std::to_string(root_) + " out of range");
  if (coords_.size() != static_cast<std::size_t>(frames_) * joints_ * 3)
    throw ContractError(who + "expected " + std::to_string(static_cast<std::size_t>(frames_) * joints_ * 3) +
                        " coordinates, got " + std::to_string(coords_.size()));
  for (double c : coords_)
    if (!std::isfinite(c)) throw ContractError(who + "non-finite coordinate");
}

LogCovDescriptor::LogCovDescriptor(Matrix entries) : x_(std::move(entries)) {
  if (x_.rows() < 1 || x_.rows() != x_.cols()) throw ContractError("LogCovDescriptor: matrix must be square");
  for (Eigen::Index j = 0; j < x_.cols(); ++j)
    for (Eigen::Index i = j + 1; i < x_.rows(); ++i)
      if (x_(i, j) != 0.0) throw ContractError("LogCovDescriptor: strict lower triangle must be zero");
  const double n = x_.norm();
  if (std::abs(n - 1.0) > 1e-9)
    throw ContractError("LogCovDescriptor: Frobenius norm " + std::to_string(n) + " is not 1");
}

Matrix relative_displacements(const SkeletonSequence& seq) {
  const int t_count = seq.num_frames();
  const int j_count = seq.num_joints();
  const int root = seq.root_index();
  Matrix p(t_count, seq.descriptor_dim());
  for (int t = 0; t < t_count; ++t) {
    int col = 0;
    for (int j = 0; j < j_count; ++j) {
      if (j == root) continue;
      for (int axis = 0; axis < 3; ++axis) p(t, col++) = seq.at(t, j, axis) - seq.at(t, root, axis);
    }
  }
  return p;
}

SymMatrix covariance(const Matrix& displacements) {
  const Eigen::Index t_count = displacements.rows();
  if (t_count < 2) throw ContractError("covariance: needs at least 2 frames");
  const Eigen::Index d = displacements.cols();
  // Accumulate frames in lexicographic order so the result is bit-identical
  // under any permutation of the frames.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(t_count));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < d; ++k)
      if (displacements(a, k) != displacements(b, k)) return displacements(a, k) < displacements(b, k);
    return false;
  });
  Matrix rows(t_count, d);
  for (Eigen::Index r = 0; r < t_count; ++r) rows.row(r) = displacements.row(order[r]);
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Matrix centered = rows.rowwise() - mean;
  Matrix c(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = centered.col(i).dot(centered.col(j)) / static_cast<double>(t_count - 1);
      c(i, j) = v;
      c(j, i) = v;
    }
  return SymMatrix(std::move(c));
}

Matrix upper_normalize(const Matrix& x) {
  Matrix u = x.triangularView<Eigen::Upper>();
  const double n = u.norm();
  if (!(n > 1e-10)) throw ContractError("upper_normalize: matrix has (near) zero norm and cannot be normalized");
  u /= n;
  return u;
}

LogCovDescriptor make_descriptor(const SkeletonSequence& seq, std::optional<double> eps) {
  try {
    if (eps && !(*eps >= 0.0)) throw ContractError("log regularizer eps must be >= 0");
    const SymMatrix c = covariance(relative_displacements(seq));
    const EigenDecomposition eig = eigh(c);
    const SymMatrix log_c = sym_log(eig, eps.value_or(default_log_eps(eig)));
    return LogCovDescriptor(upper_normalize(log_c.matrix()));
  } catch (const DescriptorError&) {
    throw;
  } catch (const Error& e) {
    throw DescriptorError(seq.label(), e.what());
  }
}

}  // namespace kronfeat
