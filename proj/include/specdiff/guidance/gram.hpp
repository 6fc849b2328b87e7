#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "specdiff/core/array3.hpp"
#include "specdiff/core/cube.hpp"
#include "specdiff/core/patch.hpp"

namespace specdiff {

/// Isolated renders M_i of each patch, stored on their footprints.
struct PatchResponses {
  std::vector<Rect> footprints;
  std::vector<Array3> images;
  std::size_t size() const { return images.size(); }
};

/// Normal equations A c = b of min_c ||sum_i c_i M_i - y||^2 with
/// A_ij = <M_i, M_j> and b_i = <M_i, y>. Only patches whose footprints
/// overlap get an entry; patches that render to (numerically) nothing are
/// inactive.
class GramSystem {
 public:
  GramSystem(const PatchResponses& responses, const Measurement& y);

  std::size_t size() const { return rows_.size(); }
  bool active(std::size_t i) const { return active_[i]; }
  double rhs(std::size_t i) const { return b_[i]; }
  /// Stored entry, zero outside the sparsity pattern.
  double entry(std::size_t i, std::size_t j) const;
  /// Neighbors (including i) with their entries, sorted by index.
  const std::vector<std::pair<std::size_t, double>>& row(std::size_t i) const { return rows_[i]; }
  std::size_t nonzeros() const;

  /// Jacobi-preconditioned conjugate gradients on the active block, run
  /// until ||A c - b|| <= rel_tol * ||b||. Inactive patches get c = 1.
  std::vector<double> solve(double rel_tol = 1e-12) const;

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
  std::vector<double> b_;
  std::vector<bool> active_;
};

/// Inner product of two footprint-sized images over their overlap.
double overlap_dot(const Rect& fa, const Array3& a, const Rect& fb, const Array3& b);

}  // namespace specdiff
