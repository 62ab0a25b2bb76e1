#include "hpgan/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hpgan {

// ---------------------------------------------------------------------------
// Architecture and initialization

void MlpArch::validate() const {
  if (widths.size() < 3) {
    throw std::invalid_argument("MlpArch: need at least 3 layers (input, hidden, output)");
  }
  for (auto w : widths) {
    if (w == 0) throw std::invalid_argument("MlpArch: layer widths must be >= 1");
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : layers) total += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return total;
}

namespace {

LayerTensors zeros_like(const MlpArch& arch) {
  LayerTensors t;
  for (std::size_t l = 0; l + 1 < arch.widths.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(arch.widths[l]);
    const auto out = static_cast<Eigen::Index>(arch.widths[l + 1]);
    t.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
  return t;
}

AdamState fresh_adam(const MlpArch& arch) { return {zeros_like(arch), zeros_like(arch), 0}; }

double softplus(double x) {
  // log(1 + e^x) without overflow.
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Mlp zero_mlp(const MlpArch& arch) {
  arch.validate();
  return {arch, zeros_like(arch)};
}

Mlp init_mlp(const MlpArch& arch, Rng& rng) {
  Mlp net = zero_mlp(arch);
  for (auto& layer : net.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    // Row-major fill order so the draw sequence matches the checkpoint layout.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = rng.uniform(-bound, bound);
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = rng.uniform(-bound, bound);
  }
  return net;
}

GanModel init_gan(const MlpArch& gen_arch, const MlpArch& disc_arch, Rng& rng,
                  AdamSettings adam, std::size_t batch_size) {
  gen_arch.validate();
  disc_arch.validate();
  if (gen_arch.output_width() != disc_arch.input_width()) {
    throw std::invalid_argument("init_gan: generator output width " +
                                std::to_string(gen_arch.output_width()) +
                                " != discriminator input width " +
                                std::to_string(disc_arch.input_width()));
  }
  if (disc_arch.output_width() != 1) {
    throw std::invalid_argument("init_gan: discriminator must have a single output");
  }
  if (batch_size == 0) throw std::invalid_argument("init_gan: batch size must be >= 1");
  GanModel m;
  m.generator = init_mlp(gen_arch, rng);
  m.discriminator = init_mlp(disc_arch, rng);
  m.generator_opt = fresh_adam(gen_arch);
  m.discriminator_opt = fresh_adam(disc_arch);
  m.adam = adam;
  m.batch_size = batch_size;
  return m;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

struct ForwardCache {
  // activations[0] is the input; activations[l + 1] the output of layer l.
  std::vector<Eigen::MatrixXd> activations;
  // Pre-activation of the final layer.
  Eigen::MatrixXd output_logits;
};

ForwardCache forward_cached(const Mlp& net, const Eigen::MatrixXd& input) {
  if (input.rows() != static_cast<Eigen::Index>(net.arch.input_width())) {
    throw std::invalid_argument("mlp_forward: input width " + std::to_string(input.rows()) +
                                " != " + std::to_string(net.arch.input_width()));
  }
  ForwardCache cache;
  cache.activations.reserve(net.layers.size() + 1);
  cache.activations.push_back(input);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd pre = layer.weight * cache.activations.back();
    pre.colwise() += layer.bias;
    const bool last = l + 1 == net.layers.size();
    if (!last || net.arch.output == OutputActivation::Tanh) {
      if (last) cache.output_logits = pre;
      cache.activations.push_back(pre.array().tanh().matrix());
    } else {
      cache.output_logits = pre;
      cache.activations.push_back(pre.unaryExpr([](double v) { return logistic(v); }));
    }
  }
  return cache;
}

// Backpropagates `delta` (gradient w.r.t. the final pre-activation) and
// accumulates parameter gradients into `grads` when non-null. Returns the
// gradient with respect to the network input.
Eigen::MatrixXd backward(const Mlp& net, const ForwardCache& cache, Eigen::MatrixXd delta,
                         LayerTensors* grads, bool need_input_grad) {
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& layer = net.layers[l];
    const auto& in = cache.activations[l];
    if (grads != nullptr) {
      (*grads)[l].weight.noalias() += delta * in.transpose();
      (*grads)[l].bias += delta.rowwise().sum();
    }
    if (l == 0 && !need_input_grad) break;
    Eigen::MatrixXd back = layer.weight.transpose() * delta;
    if (l > 0) {
      // tanh' = 1 - tanh^2
      back.array() *= 1.0 - in.array().square();
    }
    delta = std::move(back);
  }
  return need_input_grad ? delta : Eigen::MatrixXd();
}

}  // namespace

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& input) {
  return forward_cached(net, input).activations.back();
}

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input) {
  return mlp_forward(net, Eigen::MatrixXd(input)).col(0);
}

DiscriminatorGradients discriminator_gradients(const Mlp& disc, const Eigen::MatrixXd& real,
                                               const Eigen::MatrixXd& fake) {
  const auto real_cache = forward_cached(disc, real);
  const auto fake_cache = forward_cached(disc, fake);
  const double nr = static_cast<double>(real.cols());
  const double nf = static_cast<double>(fake.cols());

  DiscriminatorGradients out;
  out.grads = zeros_like(disc.arch);
  const Eigen::RowVectorXd ar = real_cache.output_logits.row(0);
  const Eigen::RowVectorXd af = fake_cache.output_logits.row(0);
  double loss = 0.0;
  Eigen::MatrixXd dr(1, ar.size()), df(1, af.size());
  for (Eigen::Index i = 0; i < ar.size(); ++i) {
    loss += softplus(-ar(i)) / nr;
    dr(0, i) = (logistic(ar(i)) - 1.0) / nr;
  }
  for (Eigen::Index i = 0; i < af.size(); ++i) {
    loss += softplus(af(i)) / nf;
    df(0, i) = logistic(af(i)) / nf;
  }
  out.loss = loss;
  backward(disc, real_cache, std::move(dr), &out.grads, false);
  backward(disc, fake_cache, std::move(df), &out.grads, false);
  return out;
}

GeneratorGradients generator_gradients(const Mlp& gen, const Mlp& disc,
                                       const Eigen::MatrixXd& noise) {
  const auto gen_cache = forward_cached(gen, noise);
  const auto& fake = gen_cache.activations.back();
  const auto disc_cache = forward_cached(disc, fake);
  const double nb = static_cast<double>(noise.cols());

  GeneratorGradients out;
  out.grads = zeros_like(gen.arch);
  const Eigen::RowVectorXd a = disc_cache.output_logits.row(0);
  Eigen::MatrixXd da(1, a.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    loss += softplus(-a(i)) / nb;
    da(0, i) = (logistic(a(i)) - 1.0) / nb;
  }
  out.loss = loss;
  Eigen::MatrixXd d_fake = backward(disc, disc_cache, std::move(da), nullptr, true);
  if (gen.arch.output == OutputActivation::Tanh) {
    d_fake.array() *= 1.0 - fake.array().square();
  } else {
    d_fake.array() *= fake.array() * (1.0 - fake.array());
  }
  backward(gen, gen_cache, std::move(d_fake), &out.grads, false);
  return out;
}

double discriminator_loss(const Mlp& disc, const Eigen::MatrixXd& real,
                          const Eigen::MatrixXd& fake) {
  const auto ar = forward_cached(disc, real).output_logits;
  const auto af = forward_cached(disc, fake).output_logits;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < ar.cols(); ++i) loss += softplus(-ar(0, i)) / ar.cols();
  for (Eigen::Index i = 0; i < af.cols(); ++i) loss += softplus(af(0, i)) / af.cols();
  return loss;
}

double generator_loss(const Mlp& gen, const Mlp& disc, const Eigen::MatrixXd& noise) {
  const auto a = forward_cached(disc, mlp_forward(gen, noise)).output_logits;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < a.cols(); ++i) loss += softplus(-a(0, i)) / a.cols();
  return loss;
}

void adam_update(Mlp& net, AdamState& state, const LayerTensors& grads,
                 const AdamSettings& s) {
  if (grads.size() != net.layers.size()) throw std::invalid_argument("adam_update: gradient shape mismatch");
  if (state.first_moment.empty()) state = fresh_adam(net.arch);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  auto apply = [&](auto& param, auto& m, auto& v, const auto& g) {
    m.array() = s.beta1 * m.array() + (1.0 - s.beta1) * g.array();
    v.array() = s.beta2 * v.array() + (1.0 - s.beta2) * g.array().square();
    param.array() -= s.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    apply(net.layers[l].weight, state.first_moment[l].weight, state.second_moment[l].weight,
          grads[l].weight);
    apply(net.layers[l].bias, state.first_moment[l].bias, state.second_moment[l].bias,
          grads[l].bias);
  }
}

Eigen::MatrixXd sample_noise(std::size_t width, std::size_t count, Rng& rng) {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = rng.uniform(-1.0, 1.0);
  }
  return z;
}

StepLosses gan_train_step(GanModel& model, const Eigen::MatrixXd& real_batch, Rng& rng) {
  if (static_cast<std::size_t>(real_batch.cols()) != model.batch_size) {
    throw std::invalid_argument("gan_train_step: batch has " + std::to_string(real_batch.cols()) +
                                " samples, expected " + std::to_string(model.batch_size));
  }
  const auto noise_width = model.generator.arch.input_width();
  StepLosses losses;

  const Eigen::MatrixXd fake = mlp_forward(model.generator, sample_noise(noise_width,
                                                                         model.batch_size, rng));
  auto dg = discriminator_gradients(model.discriminator, real_batch, fake);
  losses.d_loss = dg.loss;
  adam_update(model.discriminator, model.discriminator_opt, dg.grads, model.adam);

  auto gg = generator_gradients(model.generator, model.discriminator,
                                sample_noise(noise_width, model.batch_size, rng));
  losses.g_loss = gg.loss;
  adam_update(model.generator, model.generator_opt, gg.grads, model.adam);

  ++model.iteration;
  return losses;
}

Eigen::MatrixXd gan_generate(const GanModel& model, std::size_t count, Rng& rng) {
  if (count == 0) throw std::invalid_argument("gan_generate: count must be >= 1");
  return mlp_forward(model.generator,
                     sample_noise(model.generator.arch.input_width(), count, rng));
}

// ---------------------------------------------------------------------------
// Gradient check

namespace {

template <typename LossFn>
double max_rel_error(Mlp& net, const LayerTensors& analytic, LossFn loss,
                     std::size_t probes_per_tensor, Rng& rng) {
  constexpr double h = 1e-5;
  double worst = 0.0;
  auto probe = [&](double& param, double grad) {
    const double saved = param;
    param = saved + h;
    const double up = loss();
    param = saved - h;
    const double down = loss();
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(grad), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(grad - numeric) / denom);
  };
  auto sweep = [&](double* param, const double* grad, std::size_t size) {
    if (probes_per_tensor == 0 || probes_per_tensor >= size) {
      for (std::size_t i = 0; i < size; ++i) probe(param[i], grad[i]);
      return;
    }
    for (const auto i : rng.sample_without_replacement(size, probes_per_tensor)) {
      probe(param[i], grad[i]);
    }
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    sweep(layer.weight.data(), analytic[l].weight.data(), static_cast<std::size_t>(layer.weight.size()));
    sweep(layer.bias.data(), analytic[l].bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  return worst;
}

}  // namespace

GradientCheckReport gradient_check(const MlpArch& gen_arch, const MlpArch& disc_arch, Rng& rng,
                                   bool zero_parameters, std::size_t probes_per_tensor) {
  auto model = init_gan(gen_arch, disc_arch, rng);
  if (zero_parameters) {
    model.generator = zero_mlp(gen_arch);
    model.discriminator = zero_mlp(disc_arch);
  } else {
    // Larger-than-init parameters exercise the nonlinear regime, which the
    // fan-in initialization alone barely reaches on tiny layers; the cap keeps
    // wide layers out of saturation.
    for (auto* net : {&model.generator, &model.discriminator}) {
      for (auto& layer : net->layers) {
        const double a = std::min(1.0, 2.0 / std::sqrt(static_cast<double>(layer.weight.cols())));
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
          layer.weight.data()[i] = rng.uniform(-a, a);
        }
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
          layer.bias.data()[i] = rng.uniform(-0.5, 0.5);
        }
      }
    }
  }
  constexpr std::size_t batch = 4;
  const Eigen::MatrixXd real = sample_noise(disc_arch.input_width(), batch, rng);
  const Eigen::MatrixXd fake = sample_noise(disc_arch.input_width(), batch, rng);
  const Eigen::MatrixXd noise = sample_noise(gen_arch.input_width(), batch, rng);

  GradientCheckReport report;
  const auto dg = discriminator_gradients(model.discriminator, real, fake);
  report.discriminator_max_rel_error = max_rel_error(
      model.discriminator, dg.grads,
      [&] { return discriminator_loss(model.discriminator, real, fake); }, probes_per_tensor, rng);
  const auto gg = generator_gradients(model.generator, model.discriminator, noise);
  report.generator_max_rel_error = max_rel_error(
      model.generator, gg.grads,
      [&] { return generator_loss(model.generator, model.discriminator, noise); }, probes_per_tensor,
      rng);
  return report;
}

// ---------------------------------------------------------------------------
// Checkpoint

namespace {

void write_number(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

template <typename Derived>
void write_array(std::ostream& os, const std::string& name, const Eigen::MatrixBase<Derived>& a) {
  os << "array " << name << ' ' << a.rows() << ' ' << a.cols() << '\n';
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (c) os << ' ';
      write_number(os, a(r, c));
    }
    os << '\n';
  }
}

void write_tensors(std::ostream& os, const std::string& prefix, const LayerTensors& t) {
  for (std::size_t l = 0; l < t.size(); ++l) {
    write_array(os, prefix + ".w" + std::to_string(l), t[l].weight);
    write_array(os, prefix + ".b" + std::to_string(l), t[l].bias);
  }
}

// activation, layer count, widths
std::string arch_line(const MlpArch& a) {
  std::string s = a.output == OutputActivation::Tanh ? "tanh" : "logistic";
  s += ' ' + std::to_string(a.widths.size());
  for (auto w : a.widths) s += ' ' + std::to_string(w);
  return s;
}

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::string word() {
    std::string w;
    if (!(is_ >> w)) throw std::runtime_error("checkpoint: unexpected end of input");
    return w;
  }
  void expect(const std::string& w) {
    const auto got = word();
    if (got != w) throw std::runtime_error("checkpoint: expected '" + w + "', got '" + got + "'");
  }
  std::uint64_t integer() {
    const auto w = word();
    char* end = nullptr;
    const auto v = std::strtoull(w.c_str(), &end, 10);
    if (end == w.c_str() || *end != '\0') throw std::runtime_error("checkpoint: bad integer " + w);
    return v;
  }
  double real() {
    const auto w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end == w.c_str() || *end != '\0') throw std::runtime_error("checkpoint: bad number " + w);
    return v;
  }
  MlpArch arch() {
    MlpArch a;
    const auto act = word();
    if (act == "tanh") {
      a.output = OutputActivation::Tanh;
    } else if (act == "logistic") {
      a.output = OutputActivation::Logistic;
    } else {
      throw std::runtime_error("checkpoint: unknown activation " + act);
    }
    const auto count = integer();
    for (std::uint64_t i = 0; i < count; ++i) a.widths.push_back(integer());
    a.validate();
    return a;
  }
  template <typename Derived>
  void array(const std::string& name, Eigen::PlainObjectBase<Derived>& a) {
    expect("array");
    expect(name);
    const auto rows = static_cast<Eigen::Index>(integer());
    const auto cols = static_cast<Eigen::Index>(integer());
    if (rows != a.rows() || cols != a.cols()) {
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = real();
    }
  }
  void tensors(const std::string& prefix, LayerTensors& t) {
    for (std::size_t l = 0; l < t.size(); ++l) {
      array(prefix + ".w" + std::to_string(l), t[l].weight);
      array(prefix + ".b" + std::to_string(l), t[l].bias);
    }
  }

 private:
  std::istream& is_;
};

}  // namespace

void write_checkpoint(std::ostream& os, const GanModel& m, std::uint64_t seed) {
  os << "hpgan-checkpoint " << kCheckpointVersion << '\n';
  os << "generator " << arch_line(m.generator.arch) << '\n';
  os << "discriminator " << arch_line(m.discriminator.arch) << '\n';
  os << "iteration " << m.iteration << '\n';
  os << "seed " << seed << '\n';
  os << "batch_size " << m.batch_size << '\n';
  os << "adam ";
  write_number(os, m.adam.learning_rate);
  os << ' ';
  write_number(os, m.adam.beta1);
  os << ' ';
  write_number(os, m.adam.beta2);
  os << ' ';
  write_number(os, m.adam.epsilon);
  os << '\n';
  os << "adam_steps " << m.generator_opt.step << ' ' << m.discriminator_opt.step << '\n';
  write_tensors(os, "G", m.generator.layers);
  write_tensors(os, "D", m.discriminator.layers);
  write_tensors(os, "G.m", m.generator_opt.first_moment);
  write_tensors(os, "G.v", m.generator_opt.second_moment);
  write_tensors(os, "D.m", m.discriminator_opt.first_moment);
  write_tensors(os, "D.v", m.discriminator_opt.second_moment);
  os << "end\n";
}

LoadedCheckpoint read_checkpoint(std::istream& is) {
  Reader in(is);
  in.expect("hpgan-checkpoint");
  const auto version = in.integer();
  if (version != static_cast<std::uint64_t>(kCheckpointVersion)) {
    throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));
  }
  LoadedCheckpoint out;
  auto& m = out.model;
  in.expect("generator");
  const auto gen_arch = in.arch();
  in.expect("discriminator");
  const auto disc_arch = in.arch();
  in.expect("iteration");
  m.iteration = in.integer();
  in.expect("seed");
  out.seed = in.integer();
  in.expect("batch_size");
  m.batch_size = in.integer();
  in.expect("adam");
  m.adam.learning_rate = in.real();
  m.adam.beta1 = in.real();
  m.adam.beta2 = in.real();
  m.adam.epsilon = in.real();
  in.expect("adam_steps");
  m.generator_opt.step = in.integer();
  m.discriminator_opt.step = in.integer();

  m.generator = zero_mlp(gen_arch);
  m.discriminator = zero_mlp(disc_arch);
  m.generator_opt.first_moment = zeros_like(gen_arch);
  m.generator_opt.second_moment = zeros_like(gen_arch);
  m.discriminator_opt.first_moment = zeros_like(disc_arch);
  m.discriminator_opt.second_moment = zeros_like(disc_arch);
  in.tensors("G", m.generator.layers);
  in.tensors("D", m.discriminator.layers);
  in.tensors("G.m", m.generator_opt.first_moment);
  in.tensors("G.v", m.generator_opt.second_moment);
  in.tensors("D.m", m.discriminator_opt.first_moment);
  in.tensors("D.v", m.discriminator_opt.second_moment);
  in.expect("end");
  return out;
}

}  // namespace hpgan
