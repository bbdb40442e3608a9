#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergofit/complexity.hpp"
#include "ergofit/erm.hpp"

namespace ergofit {

// Empirical k-block law of y binned at the cut points. Blocks are counted
// cyclically (positions wrap around the end of the sequence), which makes the
// two boundary marginals identical by construction, so the stationarity
// invariant holds exactly rather than within repair tolerance.
QuantizedProcess quantize(const RealSequence& y, const std::vector<double>& cuts, int k);

// P's k'-block marginal (over the first k' positions) for k' <= P.k.
QuantizedProcess marginalize_to(const QuantizedProcess& p, int k);

// Squared/real cost on bin midpoints: cost[a][b] = loss(mid_a, mid_b).
std::vector<std::vector<double>> midpoint_cost(const QuantizedProcess& P,
                                               const QuantizedProcess& Q,
                                               const LossSpec& loss);
std::vector<std::vector<double>> hamming_cost(std::size_t a, std::size_t b);

struct CouplingSolution {
  double value = 0.0;
  std::vector<double> coupling;  // lambda over A^k x B^k, row-major in A-blocks
  std::size_t a_blocks = 0, b_blocks = 0;
};

// Exact LP over shift-consistent k-block couplings: marginal-P, marginal-Q,
// equality of the two joint boundary marginals, nonnegativity. The optimum
// lower-bounds the joining distortion of the quantized processes. Caps at
// 10^4 variables.
CouplingSolution solve_coupling_lp(const QuantizedProcess& P, const QuantizedProcess& Q,
                                   const std::vector<std::vector<double>>& cost, int k);

double distortion_lower_bound(const QuantizedProcess& P, const QuantizedProcess& Q,
                              const std::vector<std::vector<double>>& cost, int k);

enum class JoiningStrategy { Product, DiagonalIfEqual, BestCyclicShift };

// Expected first-coordinate cost of an explicit joining; always an upper
// bound on the distortion. Diagonal requires P == Q; best-cyclic-shift
// requires some cyclic rotation of P's block law to match Q's.
double distortion_upper_bound(const QuantizedProcess& P, const QuantizedProcess& Q,
                              const std::vector<std::vector<double>>& cost,
                              JoiningStrategy strategy);

struct DistortionBounds {
  double lower = 0.0;
  double upper = 0.0;
  int k = 1;
  std::string joining_used;
};

// Lower bound at block length k plus the best applicable explicit joining.
DistortionBounds distortion_bounds(const QuantizedProcess& P, const QuantizedProcess& Q,
                                   const std::vector<std::vector<double>>& cost, int k);

struct SignalNoiseResult {
  double lhs = 0.0;  // min over the family grid of LP gamma2 against Y = V + eps
  double rhs = 0.0;  // same against V alone, plus sigma^2
  double gap = 0.0;
};

// Probes min gamma2(U, Y) = min gamma2(U, V) + sigma^2 on quantized
// processes with squared midpoint cost; Gaussian noise, seeded.
SignalNoiseResult signal_noise_identity_check(const ModelFamily& fam, const RealSequence& V,
                                              double sigma, int k,
                                              const std::vector<double>& cuts,
                                              std::uint64_t seed, int x_grid_points = 33);

std::string distortion_bounds_json(const DistortionBounds& b);
std::string coupling_csv(const CouplingSolution& s);

}  // namespace ergofit
