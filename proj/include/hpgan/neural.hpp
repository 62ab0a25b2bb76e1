#pragma once

// Multilayer perceptrons with hand-written reverse-mode gradients, and the
// adversarial training loop built on them.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "hpgan/rng.hpp"

namespace hpgan {

enum class OutputActivation { Tanh, Logistic };

// Hidden layers always use tanh.
struct MlpArch {
  std::vector<std::size_t> widths;  // input, hidden..., output
  OutputActivation output = OutputActivation::Tanh;

  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

struct Mlp {
  MlpArch arch;
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
};

// Per-layer gradient (or moment) tensors with the same shapes as an Mlp.
using LayerTensors = std::vector<DenseLayer>;

struct AdamState {
  LayerTensors first_moment;
  LayerTensors second_moment;
  std::uint64_t step = 0;
};

struct AdamSettings {
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct GanModel {
  Mlp generator;
  Mlp discriminator;
  AdamState generator_opt;
  AdamState discriminator_opt;
  AdamSettings adam;
  std::size_t batch_size = 100;
  std::uint64_t iteration = 0;
};

struct StepLosses {
  double d_loss = 0.0;
  double g_loss = 0.0;
};

struct TraceLoss {
  std::uint64_t iteration;
  double d_loss;
  double g_loss;
};

struct TraceMetric {
  std::uint64_t iteration;
  double mean_metric;
  double extremal_metric;
  // Best extremal value seen so far in the run, in the problem's direction.
  double best_so_far;
};

struct TrainTrace {
  std::vector<TraceLoss> losses;
  std::vector<TraceMetric> metrics;
  // Iterations at which the windowed d_loss variance fell under the
  // stability tolerance. Informational only.
  std::vector<std::uint64_t> stable_flags;
};

Mlp init_mlp(const MlpArch& arch, Rng& rng);
Mlp zero_mlp(const MlpArch& arch);

// Throws when the generator output width differs from the discriminator input.
GanModel init_gan(const MlpArch& gen_arch, const MlpArch& disc_arch, Rng& rng,
                  AdamSettings adam = {}, std::size_t batch_size = 100);

// Column-per-sample batch forward pass.
Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& input);
Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input);

struct DiscriminatorGradients {
  LayerTensors grads;
  double loss = 0.0;
};

struct GeneratorGradients {
  LayerTensors grads;
  double loss = 0.0;
};

// -mean log D(real) - mean log(1 - D(fake)) and its parameter gradient.
DiscriminatorGradients discriminator_gradients(const Mlp& disc, const Eigen::MatrixXd& real,
                                               const Eigen::MatrixXd& fake);
// -mean log D(G(z)) and its gradient with respect to generator parameters.
GeneratorGradients generator_gradients(const Mlp& gen, const Mlp& disc,
                                       const Eigen::MatrixXd& noise);

double discriminator_loss(const Mlp& disc, const Eigen::MatrixXd& real,
                          const Eigen::MatrixXd& fake);
double generator_loss(const Mlp& gen, const Mlp& disc, const Eigen::MatrixXd& noise);

void adam_update(Mlp& net, AdamState& state, const LayerTensors& grads,
                 const AdamSettings& settings);

// Noise batch z ~ U(-1, 1), one column per sample.
Eigen::MatrixXd sample_noise(std::size_t width, std::size_t count, Rng& rng);

// One discriminator update followed by one generator update. `real_batch` has
// one flattened sample per column and exactly batch_size columns.
StepLosses gan_train_step(GanModel& model, const Eigen::MatrixXd& real_batch, Rng& rng);

// Raw generator outputs, one column per sample.
Eigen::MatrixXd gan_generate(const GanModel& model, std::size_t count, Rng& rng);

struct GradientCheckReport {
  double discriminator_max_rel_error = 0.0;
  double generator_max_rel_error = 0.0;
  double max_rel_error() const {
    return discriminator_max_rel_error > generator_max_rel_error ? discriminator_max_rel_error
                                                                 : generator_max_rel_error;
  }
};

// Compares both losses' analytic gradients against central differences with
// step 1e-5. Relative error is |a - f| / max(|a|, |f|, 1e-6). A nonzero
// `probes_per_tensor` checks that many random entries of each weight and bias
// tensor instead of all of them.
GradientCheckReport gradient_check(const MlpArch& gen_arch, const MlpArch& disc_arch, Rng& rng,
                                   bool zero_parameters = false,
                                   std::size_t probes_per_tensor = 0);

// Versioned text checkpoint: header (format version, widths, iteration, seed)
// then every parameter and optimizer array row-major with 17 significant digits.
inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const GanModel& model, std::uint64_t seed);
struct LoadedCheckpoint {
  GanModel model;
  std::uint64_t seed = 0;
};
LoadedCheckpoint read_checkpoint(std::istream& is);

}  // namespace hpgan
