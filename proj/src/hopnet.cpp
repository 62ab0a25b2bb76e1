#include "hpgan/hopnet.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace hpgan {

namespace {

void check_dims(std::size_t n, const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                const char* who) {
  const auto ni = static_cast<Eigen::Index>(n);
  if (weights.rows() != ni || weights.cols() != ni || bias.size() != ni) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch (state " +
                                std::to_string(n) + ", weights " +
                                std::to_string(weights.rows()) + "x" +
                                std::to_string(weights.cols()) + ", bias " +
                                std::to_string(bias.size()) + ")");
  }
}

Eigen::VectorXd as_vector(const BinarySequence& s) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

// sgn with sgn(0) = +1. Net inputs of encoded matrices are sums of k/n terms,
// so exact ties can land a rounding error below zero.
constexpr double kTieTolerance = 1e-9;
int hard_sign(double net) { return net >= -kTieTolerance ? 1 : -1; }

}  // namespace

EncodedSample encode(std::span<const BinarySequence> samples, double noise_magnitude, Rng& rng) {
  if (samples.empty()) throw std::invalid_argument("encode: empty sample list");
  if (noise_magnitude < 0.0) throw std::invalid_argument("encode: negative noise magnitude");
  const std::size_t n = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != n) throw std::invalid_argument("encode: samples differ in length");
  }
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(ni, ni);
  for (const auto& s : samples) {
    const Eigen::VectorXd x = as_vector(s);
    w.noalias() += x * x.transpose();
  }
  w.diagonal().setZero();  // x x^T - I has a zero diagonal for +/-1 entries

  if (noise_magnitude > 0.0) {
    for (Eigen::Index i = 0; i < ni; ++i) {
      for (Eigen::Index j = i + 1; j < ni; ++j) {
        const double b = rng.uniform(0.0, noise_magnitude);
        w(i, j) -= b;
        w(j, i) -= b;
      }
    }
  }
  w /= static_cast<double>(n);

  EncodedSample out;
  out.weights = std::move(w);
  out.noise_magnitude = noise_magnitude;
  return out;
}

std::vector<EncodedSample> sample_encoded_dataset(std::span<const BinarySequence> pool,
                                                  std::size_t count, std::size_t p_max,
                                                  double b_max, Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("sample_encoded_dataset: empty pool");
  if (p_max == 0) throw std::invalid_argument("sample_encoded_dataset: p_max must be >= 1");
  if (count == 0) throw std::invalid_argument("sample_encoded_dataset: count must be >= 1");
  if (p_max > pool.size()) {
    throw std::invalid_argument("sample_encoded_dataset: p_max " + std::to_string(p_max) +
                                " exceeds pool size " + std::to_string(pool.size()));
  }
  std::vector<EncodedSample> out;
  out.reserve(count);
  std::vector<BinarySequence> chosen;
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t p = 1 + rng.below(p_max);
    auto ids = rng.sample_without_replacement(pool.size(), p);
    chosen.clear();
    for (auto id : ids) chosen.push_back(pool[id]);
    auto sample = encode(chosen, b_max, rng);
    sample.source_ids = std::move(ids);
    out.push_back(std::move(sample));
  }
  return out;
}

double energy(const BinarySequence& state, const Eigen::MatrixXd& weights,
              const Eigen::VectorXd& bias) {
  check_dims(state.size(), weights, bias, "energy");
  const Eigen::VectorXd x = as_vector(state);
  return -0.5 * x.dot(weights * x) + bias.dot(x);
}

Eigen::VectorXd net_input(const BinarySequence& state, const Eigen::MatrixXd& weights,
                          const Eigen::VectorXd& bias) {
  check_dims(state.size(), weights, bias, "net_input");
  return weights.transpose() * as_vector(state) - bias;
}

DhnnState dhnn_step_neurons(const DhnnState& state, const Eigen::MatrixXd& weights,
                            const Eigen::VectorXd& bias, std::span<const std::size_t> neurons) {
  const std::size_t n = state.state.size();
  check_dims(n, weights, bias, "dhnn_step");
  std::vector<int> x(state.state.symbols().begin(), state.state.symbols().end());
  for (std::size_t j : neurons) {
    if (j >= n) throw std::out_of_range("dhnn_step: neuron index out of range");
    double net = -bias(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < n; ++i) {
      net += weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x[i];
    }
    x[j] = hard_sign(net);
  }
  DhnnState next{BinarySequence(std::move(x)), state.step + 1, 0.0};
  next.energy = energy(next.state, weights, bias);
  return next;
}

DhnnState dhnn_step(const DhnnState& state, const Eigen::MatrixXd& weights,
                    const Eigen::VectorXd& bias, const UpdateMode& mode, Rng& rng) {
  const std::size_t n = state.state.size();
  check_dims(n, weights, bias, "dhnn_step");
  if (std::holds_alternative<Synchronous>(mode)) {
    const Eigen::VectorXd net = net_input(state.state, weights, bias);
    std::vector<int> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = hard_sign(net(static_cast<Eigen::Index>(j)));
    DhnnState next{BinarySequence(std::move(x)), state.step + 1, 0.0};
    next.energy = energy(next.state, weights, bias);
    return next;
  }
  const std::size_t k = std::get<GeneralizedAsync>(mode).k;
  if (k == 0 || k > n) {
    throw std::invalid_argument("dhnn_step: asynchronous k = " + std::to_string(k) +
                                " outside [1, " + std::to_string(n) + "]");
  }
  const auto neurons = rng.sample_without_replacement(n, k);
  return dhnn_step_neurons(state, weights, bias, neurons);
}

bool is_fixed_point(const BinarySequence& state, const Eigen::MatrixXd& weights,
                    const Eigen::VectorXd& bias) {
  const Eigen::VectorXd net = net_input(state, weights, bias);
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (hard_sign(net(static_cast<Eigen::Index>(j))) != state[j]) return false;
  }
  return true;
}

RunResult dhnn_run(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                   const BinarySequence& init, const UpdateMode& mode, std::size_t max_steps,
                   Rng& rng) {
  if (max_steps == 0) throw std::invalid_argument("dhnn_run: max_steps must be >= 1");
  DhnnState s{init, 0, energy(init, weights, bias)};
  while (true) {
    if (is_fixed_point(s.state, weights, bias)) return {std::move(s), true};
    if (s.step >= max_steps) return {std::move(s), false};
    s = dhnn_step(s, weights, bias, mode, rng);
  }
}

DecodeResult decode(const Eigen::MatrixXd& weights, const DecoderSettings& settings, Rng& rng) {
  if (settings.restarts == 0) throw std::invalid_argument("decode: restarts must be >= 1");
  const auto n = static_cast<std::size_t>(weights.rows());
  const Eigen::VectorXd bias = Eigen::VectorXd::Zero(weights.rows());
  std::set<BinarySequence> found;
  DecodeResult out;
  std::vector<int> init(n);
  for (std::size_t r = 0; r < settings.restarts; ++r) {
    for (auto& v : init) v = rng.sign();
    auto run = dhnn_run(weights, bias, BinarySequence(init), settings.mode, settings.max_steps,
                        rng);
    if (run.converged) {
      found.insert(run.final_state.state.canonical());
    } else {
      ++out.non_converged;
    }
  }
  out.attractors.assign(found.begin(), found.end());
  return out;
}

std::vector<AccuracyCell> decoding_accuracy_sweep(std::span<const BinarySequence> pool,
                                                  std::span<const std::size_t> p_values,
                                                  std::span<const double> b_values,
                                                  std::size_t trials,
                                                  const DecoderSettings& settings, Rng& rng) {
  if (trials == 0) throw std::invalid_argument("decoding_accuracy_sweep: trials must be >= 1");
  std::vector<AccuracyCell> table;
  for (std::size_t p : p_values) {
    if (p == 0 || p > pool.size()) {
      throw std::invalid_argument("decoding_accuracy_sweep: P = " + std::to_string(p) +
                                  " outside [1, pool size]");
    }
    for (double b : b_values) {
      std::size_t recovered = 0;
      std::vector<BinarySequence> chosen;
      for (std::size_t t = 0; t < trials; ++t) {
        chosen.clear();
        for (auto id : rng.sample_without_replacement(pool.size(), p)) chosen.push_back(pool[id]);
        const auto sample = encode(chosen, b, rng);
        const auto result = decode(sample, settings, rng);
        for (const auto& src : chosen) {
          if (std::binary_search(result.attractors.begin(), result.attractors.end(),
                                 src.canonical())) {
            ++recovered;
          }
        }
      }
      table.push_back({p, b, static_cast<double>(recovered) / static_cast<double>(p * trials)});
    }
  }
  return table;
}

Eigen::MatrixXd symmetrize_weights(std::span<const double> flat, std::size_t n) {
  if (flat.size() != n * n) {
    throw std::invalid_argument("symmetrize_weights: expected " + std::to_string(n * n) +
                                " values, got " + std::to_string(flat.size()));
  }
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < ni; ++j) a(i, j) = flat[static_cast<std::size_t>(i * ni + j)];
  }
  Eigen::MatrixXd w = 0.5 * (a + a.transpose());
  w.diagonal().setZero();
  return w;
}

}  // namespace hpgan
