#pragma once

#include <span>
#include <string>
#include <vector>

#include "nozzleflow/elliptic.hpp"
#include "nozzleflow/flow.hpp"

namespace nozzleflow {

struct ContinuationOptions {
  int n_xi = 401;
  int n_eta = 41;
  double L0 = 8.0;
  double L_max = 32.0;
  double tol_farfield = 1e-6;
  double eps0_scale = 0.05;
  // Overrides eps0_scale when positive.
  double eps0 = 0.0;
  bool warm_start = true;
  PicardOptions picard;
};

struct ContinuationLevel {
  double L = 0.0;
  int iterations = 0;
  bool converged = false;
  FarFieldDeviation deviation;
};

struct ContinuationResult {
  StreamSolution solution;
  TruncationParams truncation;
  std::vector<ContinuationLevel> levels;
  bool accepted = false;  // far-field deviation reached tol_farfield
  std::vector<std::string> warnings;

  double L() const { return solution.mesh.L(); }
};

TruncationParams resolve_truncation(const FarFieldStates& farfield, const ContinuationOptions& options);

// Solves on L0, 2 L0, 4 L0, ... up to L_max with the same node counts,
// warm-starting each level from the previous solution. Stops at the first
// level whose far-field deviation is within tol_farfield, or whose Picard
// loop did not converge. `seed` (on the L0 mesh) replaces the bilinear start.
ContinuationResult continuation_solve(const NozzleGeometry& nozzle, const FarFieldStates& farfield,
                                      const ContinuationOptions& options, std::span<const double> seed = {});

}  // namespace nozzleflow
