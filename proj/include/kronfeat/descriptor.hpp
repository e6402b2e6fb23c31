#pragma once

// Skeleton sequence -> normalized log-covariance descriptor.

#include "kronfeat/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kronfeat {

/// A T-frame trajectory of J 3D joints. Coordinates are stored frame-major:
/// coords[(t * J + j) * 3 + axis].
class SkeletonSequence {
 public:
  /// Throws ContractError if T < 2, J < 2, root_index is out of range, the
  /// coordinate count is not T·J·3, or any coordinate is non-finite.
  SkeletonSequence(std::string label, int num_frames, int num_joints, std::vector<double> coords,
                   int root_index = 0);

  const std::string& label() const noexcept { return label_; }
  int num_frames() const noexcept { return frames_; }
  int num_joints() const noexcept { return joints_; }
  int root_index() const noexcept { return root_; }
  const std::vector<double>& coords() const noexcept { return coords_; }

  double at(int t, int j, int axis) const { return coords_[(static_cast<std::size_t>(t) * joints_ + j) * 3 + axis]; }
  Eigen::Vector3d joint(int t, int j) const { return {at(t, j, 0), at(t, j, 1), at(t, j, 2)}; }

  /// Descriptor side d = 3(J-1).
  int descriptor_dim() const noexcept { return 3 * (joints_ - 1); }

 private:
  std::string label_;
  int frames_;
  int joints_;
  std::vector<double> coords_;
  int root_;
};

/// Unit-Frobenius-norm matrix whose strict lower triangle is zero.
class LogCovDescriptor {
 public:
  /// Throws ContractError if the invariants do not hold (norm within 1e-9
  /// of one, strict lower triangle exactly zero).
  explicit LogCovDescriptor(Matrix entries);

  int dim() const noexcept { return static_cast<int>(x_.rows()); }
  const Matrix& matrix() const noexcept { return x_; }

 private:
  Matrix x_;
};

/// T×3(J-1) matrix; row t holds joint_k(t) - root(t) for every k != root in
/// increasing joint order.
Matrix relative_displacements(const SkeletonSequence& seq);

/// Unbiased sample covariance (divisor T-1) of the rows.
SymMatrix covariance(const Matrix& displacements);

/// Zeroes the strict lower triangle and divides by the Frobenius norm of what
/// remains. Throws ContractError if that norm is below 1e-10.
Matrix upper_normalize(const Matrix& x);

/// Full pipeline: displacements, covariance, sym_log(eps), upper_normalize.
/// When `eps` is empty the regularizer is default_log_eps of the covariance.
/// Failures surface as DescriptorError carrying the sequence label.
LogCovDescriptor make_descriptor(const SkeletonSequence& seq, std::optional<double> eps = std::nullopt);

}  // namespace kronfeat
