#include "hpgan/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hpgan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kSearchCheckpointVersion = 1;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error("bad number '" + s + "'");
  return v;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "none"; }

std::optional<double> parse_opt(const std::string& s) {
  if (s == "none") return std::nullopt;
  return parse_double(s);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

bool candidate_less(ProblemKind kind, const Candidate& a, const Candidate& b) {
  if (score_better(kind, a.score, b.score)) return true;
  if (score_better(kind, b.score, a.score)) return false;
  return a.flat < b.flat;
}

std::vector<Candidate> distinct_sorted(ProblemKind kind, std::vector<Candidate> c) {
  std::sort(c.begin(), c.end(),
            [](const Candidate& a, const Candidate& b) { return a.flat < b.flat; });
  c.erase(std::unique(c.begin(), c.end(),
                      [](const Candidate& a, const Candidate& b) { return a.flat == b.flat; }),
          c.end());
  std::sort(c.begin(), c.end(),
            [kind](const Candidate& a, const Candidate& b) { return candidate_less(kind, a, b); });
  return c;
}

// Whitespace-separated token reader over checkpoint text with line tracking
// for error messages.
class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::string line() {
    std::string l;
    if (!std::getline(in_, l)) throw std::runtime_error("checkpoint: unexpected end of file");
    ++lineno_;
    return l;
  }
  std::vector<std::string> tokens() {
    std::istringstream ss(line());
    std::vector<std::string> out;
    for (std::string t; ss >> t;) out.push_back(t);
    return out;
  }
  // "key rest-of-line"
  std::string expect(const std::string& key) {
    const auto l = line();
    if (l.compare(0, key.size(), key) != 0 ||
        (l.size() > key.size() && l[key.size()] != ' ')) {
      fail("expected '" + key + "'");
    }
    return l.size() > key.size() ? l.substr(key.size() + 1) : std::string();
  }
  std::size_t count(const std::string& key) {
    return static_cast<std::size_t>(std::stoull(expect(key)));
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("checkpoint line " + std::to_string(lineno_) + ": " + what);
  }
  std::istream& stream() { return in_; }

 private:
  std::istringstream in_;
  std::size_t lineno_ = 0;
};

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Moccs:
      return "moccs";
    case ProblemKind::Obzcp:
      return "obzcp";
    case ProblemKind::Radar:
      return "radar";
  }
  return "?";
}

ProblemKind parse_problem_kind(const std::string& text) {
  if (text == "moccs") return ProblemKind::Moccs;
  if (text == "obzcp") return ProblemKind::Obzcp;
  if (text == "radar") return ProblemKind::Radar;
  throw std::invalid_argument("unknown problem '" + text + "' (expected moccs, obzcp or radar)");
}

void Problem::validate() const {
  if (users == 0 || channels == 0 || length == 0) {
    throw std::invalid_argument("problem: users, channels and length must be >= 1");
  }
  if (kind == ProblemKind::Obzcp && (users != 1 || channels != 2 || length % 2 == 0)) {
    throw std::invalid_argument("problem: obzcp needs users = 1, channels = 2 and odd length");
  }
  if (kind == ProblemKind::Radar && (users != 1 || channels != 1 || length < 2)) {
    throw std::invalid_argument("problem: radar needs users = channels = 1 and length >= 2");
  }
}

Score score_flat(const Problem& problem, const BinarySequence& flat) {
  if (flat.size() != problem.flat_length()) {
    throw std::invalid_argument("score_flat: length " + std::to_string(flat.size()) +
                                ", expected " + std::to_string(problem.flat_length()));
  }
  switch (problem.kind) {
    case ProblemKind::Moccs:
      return {static_cast<double>(
                  moccs_metric(unflatten(flat, problem.users, problem.channels, problem.length))),
              0.0};
    case ProblemKind::Obzcp: {
      const auto set = unflatten(flat, 1, 2, problem.length);
      // PMEPR is not selected on, so the coarsest grid keeps scoring cheap.
      const auto prof = zcp_profile(set.sequences(), 4);
      const double optimum = static_cast<double>((problem.length + 1) / 2);
      const double deficit = std::max(0.0, optimum - static_cast<double>(prof.zcz_width()));
      return {deficit, static_cast<double>(prof.out_of_zone_max)};
    }
    case ProblemKind::Radar:
      try {
        return {mmf_gamma(flat), 0.0};
      } catch (const std::exception&) {
        return {0.0, 0.0};
      }
  }
  return {};
}

bool value_better(ProblemKind kind, double a, double b) {
  return kind == ProblemKind::Radar ? a > b : a < b;
}

bool score_better(ProblemKind kind, const Score& a, const Score& b) {
  if (a.value != b.value) return value_better(kind, a.value, b.value);
  return a.tiebreak < b.tiebreak;
}

std::size_t SearchConfig::sample_width() const {
  const std::size_t n = problem.flat_length();
  return use_encoder ? n * n : n;
}

double SearchConfig::effective_sample_scale() const {
  if (!use_encoder) return 1.0;
  if (sample_scale) return *sample_scale;
  return static_cast<double>(problem.flat_length()) / (static_cast<double>(p_max) + b_max);
}

double SearchConfig::effective_find_threshold() const {
  if (find_threshold) return *find_threshold;
  return problem.kind == ProblemKind::Radar ? radar_base : 0.0;
}

MlpArch SearchConfig::generator_arch() const {
  MlpArch a;
  a.widths.push_back(noise_dim);
  a.widths.insert(a.widths.end(), gen_hidden.begin(), gen_hidden.end());
  a.widths.push_back(sample_width());
  a.output = OutputActivation::Tanh;
  return a;
}

MlpArch SearchConfig::discriminator_arch() const {
  MlpArch a;
  a.widths.push_back(sample_width());
  a.widths.insert(a.widths.end(), disc_hidden.begin(), disc_hidden.end());
  a.widths.push_back(1);
  a.output = OutputActivation::Logistic;
  return a;
}

void SearchConfig::validate() const {
  problem.validate();
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("search config: " + what);
  };
  need(p_max >= 1, "p_max must be >= 1");
  need(b_max >= 0.0, "b_max must be >= 0");
  need(!sample_scale || *sample_scale > 0.0, "sample_scale must be > 0");
  need(batch_size >= 1, "batch_size must be >= 1");
  need(dataset_size >= batch_size && dataset_size % batch_size == 0,
       "dataset_size must be a positive multiple of batch_size");
  need(phase_length >= 1, "phase_length must be >= 1");
  need(iterations_total == 0 || phase_length <= iterations_total,
       "phase_length must not exceed iterations_total");
  need(eval_period >= 1, "eval_period must be >= 1");
  need(eval_count >= 1, "eval_count must be >= 1");
  need(noise_dim >= 1, "noise_dim must be >= 1");
  need(!gen_hidden.empty() && !disc_hidden.empty(), "hidden layer lists must be nonempty");
  need(decoder.restarts >= 1 && eval_restarts >= 1, "decoder restarts must be >= 1");
  need(decoder.max_steps >= 1, "decoder max_steps must be >= 1");
  need(pool_cap >= 1, "pool_cap must be >= 1");
  need(quorum >= 1 && quorum <= pool_cap, "quorum must lie in [1, pool_cap]");
  need(stability_window >= 2, "stability_window must be >= 2");
  if (const auto* g = std::get_if<GeneralizedAsync>(&decoder.mode)) {
    need(g->k >= 1 && g->k <= problem.flat_length(), "decoder k must lie in [1, n]");
  }
}

std::string SearchConfig::canonical_text() const {
  std::ostringstream os;
  auto list = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  const auto* async = std::get_if<GeneralizedAsync>(&decoder.mode);
  os << "problem = " << to_string(problem.kind) << '\n'
     << "users = " << problem.users << '\n'
     << "channels = " << problem.channels << '\n'
     << "length = " << problem.length << '\n'
     << "p_max = " << p_max << '\n'
     << "b_max = " << fmt(b_max) << '\n'
     << "dataset_size = " << dataset_size << '\n'
     << "batch_size = " << batch_size << '\n'
     << "iterations_total = " << iterations_total << '\n'
     << "phase_length = " << phase_length << '\n'
     << "eval_period = " << eval_period << '\n'
     << "eval_count = " << eval_count << '\n'
     << "candidates_per_phase = " << candidates_per_phase << '\n'
     << "seed = " << seed << '\n'
     << "noise_dim = " << noise_dim << '\n'
     << "gen_hidden = " << list(gen_hidden) << '\n'
     << "disc_hidden = " << list(disc_hidden) << '\n'
     << "learning_rate = " << fmt(adam.learning_rate) << '\n'
     << "beta1 = " << fmt(adam.beta1) << '\n'
     << "beta2 = " << fmt(adam.beta2) << '\n'
     << "adam_epsilon = " << fmt(adam.epsilon) << '\n'
     << "use_encoder = " << (use_encoder ? "true" : "false") << '\n'
     << "sample_scale = " << (sample_scale ? fmt(*sample_scale) : "auto") << '\n'
     << "decoder_restarts = " << decoder.restarts << '\n'
     << "decoder_mode = " << (async ? "async" : "sync") << '\n'
     << "decoder_k = " << (async ? async->k : 0) << '\n'
     << "decoder_max_steps = " << decoder.max_steps << '\n'
     << "eval_restarts = " << eval_restarts << '\n'
     << "update_pool = " << (update_pool ? "true" : "false") << '\n'
     << "radar_base = " << fmt(radar_base) << '\n'
     << "radar_step = " << fmt(radar_step) << '\n'
     << "quorum = " << quorum << '\n'
     << "pool_cap = " << pool_cap << '\n'
     << "find_threshold = " << fmt_opt(find_threshold) << '\n'
     << "stability_window = " << stability_window << '\n'
     << "stability_tolerance = " << fmt(stability_tolerance) << '\n'
     << "checkpoint_every = " << checkpoint_every << '\n';
  return os.str();
}

PoolUpdate update_training_set(const SearchConfig& config, const std::vector<Candidate>& pool,
                               const std::vector<Candidate>& candidates,
                               std::size_t phase_index) {
  const auto kind = config.problem.kind;
  PoolUpdate out;
  std::vector<Candidate> ranked = distinct_sorted(kind, candidates);
  std::size_t keep = config.pool_cap;
  if (kind == ProblemKind::Radar) {
    const double t = config.radar_base + config.radar_step * static_cast<double>(phase_index);
    out.threshold = t;
    std::erase_if(ranked, [t](const Candidate& c) { return c.score.value < t; });
  } else if (kind == ProblemKind::Moccs) {
    keep = config.dataset_size;
  }
  out.qualifying = ranked.size();
  if (ranked.size() < config.quorum) {
    out.pool = pool;
    out.stalled = true;
    return out;
  }
  if (ranked.size() > keep) ranked.resize(keep);
  out.pool = std::move(ranked);
  return out;
}

PoolSummary summarize_pool(const std::vector<Candidate>& pool) {
  PoolSummary s;
  s.pool_size = pool.size();
  if (pool.empty()) return s;
  s.min_value = s.max_value = pool.front().score.value;
  double sum = 0.0;
  for (const auto& c : pool) {
    s.min_value = std::min(s.min_value, c.score.value);
    s.max_value = std::max(s.max_value, c.score.value);
    sum += c.score.value;
  }
  s.mean_value = sum / static_cast<double>(pool.size());
  return s;
}

// ---------------------------------------------------------------------------

SearchRun::SearchRun(SearchConfig config) : config_(std::move(config)), rngs_(config_.seed) {
  config_.validate();
}

SearchRun::SearchRun(SearchConfig config, const std::vector<BinarySequence>& initial_pool)
    : SearchRun(std::move(config)) {
  model_ = init_gan(config_.generator_arch(), config_.discriminator_arch(), rngs_.init,
                    config_.adam, config_.batch_size);
  if (initial_pool.empty()) throw std::invalid_argument("hpgan_search: empty initial pool");
  std::vector<Candidate> cands;
  for (const auto& s : initial_pool) {
    if (s.size() != config_.problem.flat_length()) {
      throw std::invalid_argument("hpgan_search: pool member of length " +
                                  std::to_string(s.size()) + ", problem needs " +
                                  std::to_string(config_.problem.flat_length()));
    }
    const auto c = s.canonical();
    cands.push_back({c, score_flat(config_.problem, c)});
  }
  pool_ = distinct_sorted(config_.problem.kind, std::move(cands));
  if (config_.use_encoder && config_.p_max > pool_.size()) {
    throw std::invalid_argument("hpgan_search: p_max " + std::to_string(config_.p_max) +
                                " exceeds the " + std::to_string(pool_.size()) +
                                " distinct pool members");
  }
  for (const auto& c : pool_) union_.push_back(c.flat);
  std::sort(union_.begin(), union_.end());
  generations_.push_back(summarize_pool(pool_));
}

void SearchRun::build_dataset() {
  const std::size_t width = config_.sample_width();
  const std::size_t n = config_.problem.flat_length();
  dataset_.resize(static_cast<Eigen::Index>(width),
                  static_cast<Eigen::Index>(config_.dataset_size));
  if (config_.use_encoder) {
    std::vector<BinarySequence> flats;
    for (const auto& c : pool_) flats.push_back(c.flat);
    const auto samples = sample_encoded_dataset(flats, config_.dataset_size, config_.p_max,
                                                config_.b_max, rngs_.encode);
    const double scale = config_.effective_sample_scale();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      // Row-major flattening of W.
      const Eigen::MatrixXd wt = samples[i].weights.transpose();
      dataset_.col(static_cast<Eigen::Index>(i)) =
          scale * Eigen::Map<const Eigen::VectorXd>(wt.data(), static_cast<Eigen::Index>(n * n));
    }
  } else {
    for (std::size_t i = 0; i < config_.dataset_size; ++i) {
      const auto& s = pool_[rngs_.encode.below(pool_.size())].flat;
      for (std::size_t k = 0; k < n; ++k) {
        dataset_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = s[k];
      }
    }
  }
}

void SearchRun::start_phase() {
  encode_snapshot_ = rngs_.encode.save_state();
  build_dataset();
  phase_candidates_.clear();
}

void SearchRun::train_one() {
  const std::size_t per_epoch = config_.minibatches_per_epoch();
  const std::size_t slot = static_cast<std::size_t>(iteration_ - phase_begin_) % per_epoch;
  if (slot == 0) {
    order_.resize(config_.dataset_size);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    rngs_.train.shuffle(order_);
  }
  Eigen::MatrixXd batch(dataset_.rows(), static_cast<Eigen::Index>(config_.batch_size));
  for (std::size_t b = 0; b < config_.batch_size; ++b) {
    batch.col(static_cast<Eigen::Index>(b)) =
        dataset_.col(static_cast<Eigen::Index>(order_[slot * config_.batch_size + b]));
  }
  const auto losses = gan_train_step(model_, batch, rngs_.train);
  ++iteration_;
  trace_.losses.push_back({iteration_, losses.d_loss, losses.g_loss});
}

std::vector<BinarySequence> SearchRun::decode_column(const Eigen::VectorXd& column,
                                                     std::size_t restarts, Rng& rng) const {
  if (decode_hook_) return decode_hook_(column, rng);
  const std::size_t n = config_.problem.flat_length();
  if (!config_.use_encoder) {
    std::vector<int> s(n);
    for (std::size_t k = 0; k < n; ++k) s[k] = column(static_cast<Eigen::Index>(k)) >= 0.0 ? 1 : -1;
    return {BinarySequence(std::move(s)).canonical()};
  }
  const Eigen::MatrixXd w =
      symmetrize_weights(std::span<const double>(column.data(), static_cast<std::size_t>(column.size())), n);
  DecoderSettings settings = config_.decoder;
  settings.restarts = restarts;
  return decode(w, settings, rng).attractors;
}

EvalResult SearchRun::evaluate(std::size_t count, std::size_t restarts) {
  EvalResult r;
  Rng& rng = rngs_.decode;
  const Eigen::MatrixXd gen = generate_hook_ ? generate_hook_(count, rng)
                                             : gan_generate(model_, count, rng);
  r.generated = static_cast<std::size_t>(gen.cols());
  for (Eigen::Index c = 0; c < gen.cols(); ++c) {
    for (auto& s : decode_column(gen.col(c), restarts, rng)) {
      const auto flat = s.canonical();
      r.candidates.push_back({flat, score_flat(config_.problem, flat)});
    }
  }
  if (!r.candidates.empty()) {
    double sum = 0.0;
    double ext = r.candidates.front().score.value;
    for (const auto& c : r.candidates) {
      sum += c.score.value;
      if (value_better(config_.problem.kind, c.score.value, ext)) ext = c.score.value;
    }
    r.mean_value = sum / static_cast<double>(r.candidates.size());
    r.extremal_value = ext;
  }
  return r;
}

void SearchRun::note_best(double value) {
  if (!best_so_far_ || value_better(config_.problem.kind, value, *best_so_far_)) {
    best_so_far_ = value;
  }
}

void SearchRun::record_finds(const std::vector<Candidate>& cands) {
  const double t = config_.effective_find_threshold();
  const bool radar = config_.problem.kind == ProblemKind::Radar;
  for (const auto& c : cands) {
    const bool qualifies = radar ? c.score.value >= t : c.score.value <= t;
    if (!qualifies) continue;
    auto it = std::lower_bound(finds_.begin(), finds_.end(), c.flat,
                               [](const Find& f, const BinarySequence& s) { return f.flat < s; });
    if (it != finds_.end() && it->flat == c.flat) continue;
    const bool novel = !std::binary_search(union_.begin(), union_.end(), c.flat);
    finds_.insert(it, Find{c.flat, c.score, novel, iteration_});
  }
}

void SearchRun::record_eval() {
  auto r = evaluate(config_.eval_count, config_.eval_restarts);
  if (r.extremal_value) note_best(*r.extremal_value);
  trace_.metrics.push_back({iteration_, r.mean_value.value_or(kNaN),
                            r.extremal_value.value_or(kNaN), best_so_far_.value_or(kNaN)});
  record_finds(r.candidates);
  phase_candidates_.insert(phase_candidates_.end(), r.candidates.begin(), r.candidates.end());

  const std::size_t w = config_.stability_window;
  if (trace_.losses.size() >= w) {
    double mean = 0.0;
    for (std::size_t i = trace_.losses.size() - w; i < trace_.losses.size(); ++i) {
      mean += trace_.losses[i].d_loss;
    }
    mean /= static_cast<double>(w);
    double var = 0.0;
    for (std::size_t i = trace_.losses.size() - w; i < trace_.losses.size(); ++i) {
      const double d = trace_.losses[i].d_loss - mean;
      var += d * d;
    }
    var /= static_cast<double>(w - 1);
    if (var < config_.stability_tolerance) trace_.stable_flags.push_back(iteration_);
  }
}

void SearchRun::end_phase() {
  if (config_.candidates_per_phase > 0) {
    auto r = evaluate(config_.candidates_per_phase, config_.decoder.restarts);
    if (r.extremal_value) note_best(*r.extremal_value);
    record_finds(r.candidates);
    phase_candidates_.insert(phase_candidates_.end(), r.candidates.begin(), r.candidates.end());
  }
  ++phase_;
  if (config_.update_pool) {
    auto upd = update_training_set(config_, pool_, phase_candidates_, phase_);
    PoolSummary summary = summarize_pool(upd.pool);
    summary.phase_index = phase_;
    summary.threshold = upd.threshold;
    summary.stalled = upd.stalled;
    summary.qualifying = upd.qualifying;
    if (!upd.stalled) {
      pool_ = std::move(upd.pool);
      for (const auto& c : pool_) union_.push_back(c.flat);
      std::sort(union_.begin(), union_.end());
      union_.erase(std::unique(union_.begin(), union_.end()), union_.end());
    }
    generations_.push_back(summary);
  }
  phase_candidates_.clear();
  phase_begin_ = iteration_;
}

SearchRun::Status SearchRun::run(const CheckpointSink& sink,
                                 std::optional<std::uint64_t> stop_after) {
  const std::size_t per_epoch = config_.minibatches_per_epoch();
  const std::uint64_t total = config_.iterations_total;
  const std::uint64_t every = config_.checkpoint_every;
  bool first = true;
  while (iteration_ < total) {
    if ((iteration_ - phase_begin_) % per_epoch == 0 && !first) {
      const bool periodic = every > 0 && iteration_ / every > last_checkpoint_ / every;
      if (periodic) last_checkpoint_ = iteration_;
      const bool stop = stop_after && iteration_ >= *stop_after;
      if ((periodic || stop) && sink) sink(checkpoint_text());
      if (stop) return Status::Stopped;
    }
    first = false;
    if (iteration_ == phase_begin_) start_phase();
    train_one();
    if (iteration_ % config_.eval_period == 0) record_eval();
    if (iteration_ - phase_begin_ == config_.phase_length || iteration_ == total) end_phase();
  }
  if (sink) sink(checkpoint_text());
  return Status::Completed;
}

RunReport SearchRun::report() const {
  RunReport r;
  r.problem = config_.problem;
  r.seed = config_.seed;
  r.iterations = iteration_;
  r.found = finds_;
  const auto kind = config_.problem.kind;
  std::stable_sort(r.found.begin(), r.found.end(), [kind](const Find& a, const Find& b) {
    if (score_better(kind, a.score, b.score)) return true;
    if (score_better(kind, b.score, a.score)) return false;
    return a.flat < b.flat;
  });
  r.trace = trace_;
  r.generations = generations_;
  return r;
}

std::string SearchRun::checkpoint_text() const {
  std::ostringstream os;
  auto cand = [&](const Candidate& c) {
    os << c.flat.to_signs() << ' ' << fmt(c.score.value) << ' ' << fmt(c.score.tiebreak) << '\n';
  };
  os << "hpgan-search-checkpoint " << kSearchCheckpointVersion << '\n';
  os << "config_digest " << hex64(fnv1a(config_.canonical_text())) << '\n';
  os << "iteration " << iteration_ << '\n';
  os << "phase " << phase_ << ' ' << phase_begin_ << '\n';
  os << "last_checkpoint " << last_checkpoint_ << '\n';
  os << "best_so_far " << fmt_opt(best_so_far_) << '\n';
  os << "rng_encode " << rngs_.encode.save_state() << '\n';
  os << "rng_encode_snapshot " << (encode_snapshot_.empty() ? "none" : encode_snapshot_) << '\n';
  os << "rng_init " << rngs_.init.save_state() << '\n';
  os << "rng_train " << rngs_.train.save_state() << '\n';
  os << "rng_decode " << rngs_.decode.save_state() << '\n';
  os << "rng_ga " << rngs_.ga.save_state() << '\n';
  os << "pool " << pool_.size() << '\n';
  for (const auto& c : pool_) cand(c);
  os << "union " << union_.size() << '\n';
  for (const auto& s : union_) os << s.to_signs() << '\n';
  os << "phase_candidates " << phase_candidates_.size() << '\n';
  for (const auto& c : phase_candidates_) cand(c);
  os << "finds " << finds_.size() << '\n';
  for (const auto& f : finds_) {
    os << f.flat.to_signs() << ' ' << fmt(f.score.value) << ' ' << fmt(f.score.tiebreak) << ' '
       << (f.novel ? 1 : 0) << ' ' << f.iteration << '\n';
  }
  os << "losses " << trace_.losses.size() << '\n';
  for (const auto& l : trace_.losses) {
    os << l.iteration << ' ' << fmt(l.d_loss) << ' ' << fmt(l.g_loss) << '\n';
  }
  os << "metrics " << trace_.metrics.size() << '\n';
  for (const auto& m : trace_.metrics) {
    os << m.iteration << ' ' << fmt(m.mean_metric) << ' ' << fmt(m.extremal_metric) << ' '
       << fmt(m.best_so_far) << '\n';
  }
  os << "stable " << trace_.stable_flags.size() << '\n';
  for (auto it : trace_.stable_flags) os << it << '\n';
  os << "generations " << generations_.size() << '\n';
  for (const auto& g : generations_) {
    os << g.phase_index << ' ' << fmt_opt(g.threshold) << ' ' << (g.stalled ? 1 : 0) << ' '
       << g.qualifying << ' ' << g.pool_size << ' ' << fmt(g.min_value) << ' '
       << fmt(g.mean_value) << ' ' << fmt(g.max_value) << '\n';
  }
  os << "gan\n";
  write_checkpoint(os, model_, config_.seed);
  return os.str();
}

SearchRun SearchRun::resume(SearchConfig config, const std::string& checkpoint) {
  SearchRun run(std::move(config));
  Reader rd(checkpoint);
  auto header = rd.tokens();
  if (header.size() != 2 || header[0] != "hpgan-search-checkpoint" ||
      header[1] != std::to_string(kSearchCheckpointVersion)) {
    rd.fail("not a search checkpoint of version " + std::to_string(kSearchCheckpointVersion));
  }
  const auto digest = rd.expect("config_digest");
  const auto expected = hex64(fnv1a(run.config_.canonical_text()));
  if (digest != expected) {
    throw std::runtime_error("resume: config digest mismatch (checkpoint " + digest +
                             ", current config " + expected + ")");
  }
  auto to_u64 = [](const std::string& s) { return static_cast<std::uint64_t>(std::stoull(s)); };
  run.iteration_ = to_u64(rd.expect("iteration"));
  {
    std::istringstream ss(rd.expect("phase"));
    ss >> run.phase_ >> run.phase_begin_;
    if (!ss) rd.fail("bad phase line");
  }
  run.last_checkpoint_ = to_u64(rd.expect("last_checkpoint"));
  run.best_so_far_ = parse_opt(rd.expect("best_so_far"));
  const auto encode_state = rd.expect("rng_encode");
  const auto snapshot = rd.expect("rng_encode_snapshot");
  run.rngs_.init.restore_state(rd.expect("rng_init"));
  run.rngs_.train.restore_state(rd.expect("rng_train"));
  run.rngs_.decode.restore_state(rd.expect("rng_decode"));
  run.rngs_.ga.restore_state(rd.expect("rng_ga"));

  auto read_cands = [&](const std::string& key) {
    std::vector<Candidate> out(rd.count(key));
    for (auto& c : out) {
      const auto t = rd.tokens();
      if (t.size() != 3) rd.fail("bad candidate line");
      c = {BinarySequence::from_signs(t[0]), {parse_double(t[1]), parse_double(t[2])}};
    }
    return out;
  };
  run.pool_ = read_cands("pool");
  run.union_.resize(rd.count("union"));
  for (auto& s : run.union_) s = BinarySequence::from_signs(rd.line());
  run.phase_candidates_ = read_cands("phase_candidates");
  run.finds_.resize(rd.count("finds"));
  for (auto& f : run.finds_) {
    const auto t = rd.tokens();
    if (t.size() != 5) rd.fail("bad find line");
    f = {BinarySequence::from_signs(t[0]), {parse_double(t[1]), parse_double(t[2])}, t[3] == "1",
         to_u64(t[4])};
  }
  run.trace_.losses.resize(rd.count("losses"));
  for (auto& l : run.trace_.losses) {
    const auto t = rd.tokens();
    if (t.size() != 3) rd.fail("bad loss line");
    l = {to_u64(t[0]), parse_double(t[1]), parse_double(t[2])};
  }
  run.trace_.metrics.resize(rd.count("metrics"));
  for (auto& m : run.trace_.metrics) {
    const auto t = rd.tokens();
    if (t.size() != 4) rd.fail("bad metric line");
    m = {to_u64(t[0]), parse_double(t[1]), parse_double(t[2]), parse_double(t[3])};
  }
  run.trace_.stable_flags.resize(rd.count("stable"));
  for (auto& s : run.trace_.stable_flags) s = to_u64(rd.line());
  run.generations_.resize(rd.count("generations"));
  for (auto& g : run.generations_) {
    const auto t = rd.tokens();
    if (t.size() != 8) rd.fail("bad generation line");
    g.phase_index = static_cast<std::size_t>(to_u64(t[0]));
    g.threshold = parse_opt(t[1]);
    g.stalled = t[2] == "1";
    g.qualifying = static_cast<std::size_t>(to_u64(t[3]));
    g.pool_size = static_cast<std::size_t>(to_u64(t[4]));
    g.min_value = parse_double(t[5]);
    g.mean_value = parse_double(t[6]);
    g.max_value = parse_double(t[7]);
  }
  rd.expect("gan");
  auto loaded = read_checkpoint(rd.stream());
  if (loaded.model.generator.arch.widths != run.config_.generator_arch().widths ||
      loaded.model.discriminator.arch.widths != run.config_.discriminator_arch().widths) {
    throw std::runtime_error("resume: network shapes differ from the config");
  }
  run.model_ = std::move(loaded.model);

  // Mid-phase: rebuild the phase's dataset from the encode stream as it was
  // when the phase began.
  if (run.iteration_ > run.phase_begin_) {
    if (snapshot == "none") rd.fail("mid-phase checkpoint without a dataset snapshot");
    run.rngs_.encode.restore_state(snapshot);
    run.build_dataset();
    run.encode_snapshot_ = snapshot;
  } else if (snapshot != "none") {
    run.encode_snapshot_ = snapshot;
  }
  run.rngs_.encode.restore_state(encode_state);
  return run;
}

RunReport hpgan_search(const SearchConfig& config, const std::vector<BinarySequence>& initial_pool) {
  const auto t0 = std::chrono::steady_clock::now();
  SearchRun run(config, initial_pool);
  run.run();
  auto r = run.report();
  r.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

EvalResult evaluate_generator(SearchRun& run, std::size_t count) {
  return run.evaluate(count, run.config().eval_restarts);
}

OracleResult brute_force_oracle(const Problem& problem) {
  problem.validate();
  const std::size_t bits = problem.flat_length();
  if (bits > 24) {
    throw std::invalid_argument("brute_force_oracle: 2^" + std::to_string(bits) +
                                " states exceed the 2^24 limit");
  }
  OracleResult out;
  // Metrics are negation invariant, so fix the first symbol to +1.
  const std::uint64_t states = std::uint64_t{1} << (bits - 1);
  std::vector<int> s(bits);
  bool have = false;
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    s[0] = 1;
    for (std::size_t k = 1; k < bits; ++k) s[k] = ((mask >> (k - 1)) & 1) ? -1 : 1;
    BinarySequence flat(s);
    const Score sc = score_flat(problem, flat);
    ++out.states;
    const bool tie = have && std::abs(sc.value - out.best.value) <=
                                 1e-9 * std::max(1.0, std::abs(out.best.value)) &&
                     sc.tiebreak == out.best.tiebreak;
    if (!have || (!tie && score_better(problem.kind, sc, out.best))) {
      out.best = sc;
      out.optima.clear();
      out.optima.push_back(std::move(flat));
      have = true;
    } else if (tie) {
      out.optima.push_back(std::move(flat));
    }
  }
  std::sort(out.optima.begin(), out.optima.end());
  return out;
}

}  // namespace hpgan
