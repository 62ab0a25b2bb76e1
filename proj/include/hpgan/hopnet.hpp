#pragma once

// Outer-product encoder and discrete Hopfield decoder.

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hpgan/rng.hpp"
#include "hpgan/seqcore.hpp"

namespace hpgan {

struct EncodedSample {
  // n x n, symmetric, zero diagonal.
  Eigen::MatrixXd weights;
  double noise_magnitude = 0.0;
  std::vector<std::size_t> source_ids;
};

struct DhnnState {
  BinarySequence state;
  std::size_t step = 0;
  double energy = 0.0;
};

struct Synchronous {};

// k distinct neurons drawn uniformly per step, updated one after another.
struct GeneralizedAsync {
  std::size_t k = 5;
};

using UpdateMode = std::variant<Synchronous, GeneralizedAsync>;

struct RunResult {
  DhnnState final_state;
  bool converged = false;
};

struct DecodeResult {
  // Canonical attractors (first element +1), sorted and unique.
  std::vector<BinarySequence> attractors;
  std::size_t non_converged = 0;
};

struct AccuracyCell {
  std::size_t patterns = 0;  // P
  double noise = 0.0;        // b
  double accuracy = 0.0;
};

struct DecoderSettings {
  std::size_t restarts = 32;
  UpdateMode mode = GeneralizedAsync{5};
  std::size_t max_steps = 200;
};

// weights = (1/n) [ sum_p (x_p x_p^T - I) - B ], B symmetric with zero diagonal
// and off-diagonal entries uniform in [0, noise_magnitude].
EncodedSample encode(std::span<const BinarySequence> samples, double noise_magnitude, Rng& rng);

// `count` samples, each from P ~ U{1..p_max} distinct pool members.
std::vector<EncodedSample> sample_encoded_dataset(std::span<const BinarySequence> pool,
                                                  std::size_t count, std::size_t p_max,
                                                  double b_max, Rng& rng);

double energy(const BinarySequence& state, const Eigen::MatrixXd& weights,
              const Eigen::VectorXd& bias);

// Net input W^T x - b of every neuron.
Eigen::VectorXd net_input(const BinarySequence& state, const Eigen::MatrixXd& weights,
                          const Eigen::VectorXd& bias);

DhnnState dhnn_step(const DhnnState& state, const Eigen::MatrixXd& weights,
                    const Eigen::VectorXd& bias, const UpdateMode& mode, Rng& rng);

// Same as dhnn_step but with an explicit list of neurons to update in order.
DhnnState dhnn_step_neurons(const DhnnState& state, const Eigen::MatrixXd& weights,
                            const Eigen::VectorXd& bias, std::span<const std::size_t> neurons);

bool is_fixed_point(const BinarySequence& state, const Eigen::MatrixXd& weights,
                    const Eigen::VectorXd& bias);

RunResult dhnn_run(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                   const BinarySequence& init, const UpdateMode& mode, std::size_t max_steps,
                   Rng& rng);

DecodeResult decode(const Eigen::MatrixXd& weights, const DecoderSettings& settings, Rng& rng);
inline DecodeResult decode(const EncodedSample& sample, const DecoderSettings& settings,
                           Rng& rng) {
  return decode(sample.weights, settings, rng);
}

// Fraction of source patterns recovered (up to sign) over `trials` encode/decode
// round trips, for every (P, b) combination.
std::vector<AccuracyCell> decoding_accuracy_sweep(std::span<const BinarySequence> pool,
                                                  std::span<const std::size_t> p_values,
                                                  std::span<const double> b_values,
                                                  std::size_t trials,
                                                  const DecoderSettings& settings, Rng& rng);

// (A + A^T)/2 with the diagonal cleared; reshapes a row-major n*n vector.
Eigen::MatrixXd symmetrize_weights(std::span<const double> flat, std::size_t n);

}  // namespace hpgan
