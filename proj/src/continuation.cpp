#include "nozzleflow/continuation.hpp"

#include <algorithm>
#include <string>

#include "nozzleflow/errors.hpp"

namespace nozzleflow {

TruncationParams resolve_truncation(const FarFieldStates& farfield, const ContinuationOptions& options) {
  if (options.eps0 > 0.0) return TruncationParams{options.eps0};
  return default_truncation(farfield, options.eps0_scale);
}

ContinuationResult continuation_solve(const NozzleGeometry& nozzle, const FarFieldStates& farfield,
                                      const ContinuationOptions& options, std::span<const double> seed) {
  if (!(options.L0 > 0.0) || options.L_max < options.L0) throw ConfigError("need 0 < L0 <= L_max");
  if (!(options.tol_farfield > 0.0)) throw ConfigError("tol_farfield must be positive");
  const TruncationParams params = resolve_truncation(farfield, options);

  double L = options.L0;
  Mesh mesh = generate_mesh(truncate(nozzle, L), options.n_xi, options.n_eta);
  StreamSolution sol = solve_bvp(mesh, farfield, params, options.picard, seed);
  ContinuationResult result{std::move(sol), params, {}, false, {}};

  for (;;) {
    const StreamSolution& current = result.solution;
    ContinuationLevel level;
    level.L = L;
    level.iterations = current.iterations;
    level.converged = current.converged;
    level.deviation = farfield_deviation(current.mesh, current.psi, farfield);
    const double dev = std::max(level.deviation.minus, level.deviation.plus);
    if (!result.levels.empty()) {
      const ContinuationLevel& prev = result.levels.back();
      if (dev >= std::max(prev.deviation.minus, prev.deviation.plus)) {
        result.warnings.push_back("slow decay; increase L cap");
      }
    }
    result.levels.push_back(level);
    if (!current.converged) break;
    if (dev <= options.tol_farfield) {
      result.accepted = true;
      break;
    }
    if (2.0 * L > options.L_max * (1.0 + 1e-12)) {
      result.warnings.push_back("far-field tolerance not reached at the L cap; keeping L = " + std::to_string(L));
      break;
    }

    L *= 2.0;
    Mesh next = generate_mesh(truncate(nozzle, L), options.n_xi, options.n_eta);
    std::vector<double> start;
    if (options.warm_start) start = resample(current.mesh, current.psi, next);
    result.solution = solve_bvp(next, farfield, params, options.picard, start);
  }
  return result;
}

}  // namespace nozzleflow
