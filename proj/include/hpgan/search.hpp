#pragma once

// The encode -> train -> generate -> decode -> score -> select -> update loop.
// Candidates travel as flattened sequences (see flatten()); a MOCCS set of
// J x M sequences of length N is one flat sequence of length J*M*N.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpgan/hopnet.hpp"
#include "hpgan/neural.hpp"
#include "hpgan/rng.hpp"
#include "hpgan/seqcore.hpp"

namespace hpgan {

enum class ProblemKind { Moccs, Obzcp, Radar };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& text);

// MOCCS: moccs_metric, minimized.
// OBZCP: (N+1)/2 - ZCZ width (clamped at 0), minimized; ties broken by the
//        smaller out-of-zone magnitude.
// RADAR: gamma_MMF, maximized. A singular R scores 0.
struct Score {
  double value = 0.0;
  double tiebreak = 0.0;
};

struct Problem {
  ProblemKind kind = ProblemKind::Moccs;
  std::size_t users = 1;
  std::size_t channels = 1;
  std::size_t length = 1;

  std::size_t flat_length() const { return users * channels * length; }
  void validate() const;
};

Score score_flat(const Problem& problem, const BinarySequence& flat);
// Strict "a ranks ahead of b" in the problem's direction.
bool score_better(ProblemKind kind, const Score& a, const Score& b);
bool value_better(ProblemKind kind, double a, double b);

struct Candidate {
  BinarySequence flat;  // canonical (first symbol +1)
  Score score;
};

struct SearchConfig {
  Problem problem;
  std::size_t p_max = 4;
  double b_max = 0.4;
  std::size_t dataset_size = 500;
  std::size_t batch_size = 100;
  std::size_t iterations_total = 10000;
  std::size_t phase_length = 2500;
  std::size_t eval_period = 100;
  std::size_t eval_count = 100;
  // Generated samples decoded at the end of every phase.
  std::size_t candidates_per_phase = 100;
  std::uint64_t seed = 1;

  std::size_t noise_dim = 100;
  std::vector<std::size_t> gen_hidden{1024};
  std::vector<std::size_t> disc_hidden{1024};
  AdamSettings adam;

  // false: plain GAN on the flat sequences, decoded by sign.
  bool use_encoder = true;
  // Factor applied to encoded samples before training. Unset means
  // n / (p_max + b_max), the largest entry magnitude mapped to 1. Decoding
  // only depends on sign(Wx), so any positive factor leaves it unchanged.
  std::optional<double> sample_scale;
  DecoderSettings decoder;     // phase-end candidates
  std::size_t eval_restarts = 1;

  bool update_pool = false;
  double radar_base = 13.0;
  double radar_step = 3.0;
  std::size_t quorum = 10;
  std::size_t pool_cap = 100;
  // Finds: MOCCS/OBZCP value <= threshold, RADAR value >= threshold.
  // Unset means 0 for MOCCS/OBZCP and radar_base for RADAR.
  std::optional<double> find_threshold;

  std::size_t stability_window = 200;
  double stability_tolerance = 1e-3;
  // Iterations between checkpoints (taken at the next epoch boundary);
  // 0 disables periodic checkpoints.
  std::size_t checkpoint_every = 0;

  std::size_t minibatches_per_epoch() const { return dataset_size / batch_size; }
  std::size_t sample_width() const;
  double effective_sample_scale() const;
  double effective_find_threshold() const;
  MlpArch generator_arch() const;
  MlpArch discriminator_arch() const;
  void validate() const;
  // Canonical key = value text of every field; drives the config digest.
  std::string canonical_text() const;
};

struct PoolUpdate {
  std::vector<Candidate> pool;
  bool stalled = false;
  std::optional<double> threshold;
  std::size_t qualifying = 0;
};

// Radar: keep up to pool_cap distinct candidates with value >= base + step*k;
// fewer than `quorum` leaves the pool unchanged and flags a stall.
// MOCCS: best dataset_size candidates by metric. OBZCP: best pool_cap by
// (ZCZ deficit, out-of-zone magnitude). Empty candidate lists stall.
PoolUpdate update_training_set(const SearchConfig& config, const std::vector<Candidate>& pool,
                               const std::vector<Candidate>& candidates, std::size_t phase_index);

struct PoolSummary {
  std::size_t phase_index = 0;
  std::optional<double> threshold;
  bool stalled = false;
  std::size_t qualifying = 0;
  std::size_t pool_size = 0;
  double min_value = 0.0;
  double mean_value = 0.0;
  double max_value = 0.0;
};
PoolSummary summarize_pool(const std::vector<Candidate>& pool);

struct Find {
  BinarySequence flat;
  Score score;
  bool novel = false;
  std::uint64_t iteration = 0;
};

struct RunReport {
  Problem problem;
  std::uint64_t seed = 0;
  std::uint64_t iterations = 0;
  std::vector<Find> found;  // best first
  TrainTrace trace;
  std::vector<PoolSummary> generations;  // [0] is the initial pool
  double wall_clock_seconds = 0.0;       // not part of the deterministic report
};

// Converts a generated column into decoded candidates (canonical flats).
using DecodeHook = std::function<std::vector<BinarySequence>(const Eigen::VectorXd&, Rng&)>;
// Produces `count` generated columns.
using GenerateHook = std::function<Eigen::MatrixXd(std::size_t, Rng&)>;

struct EvalResult {
  std::optional<double> mean_value;
  std::optional<double> extremal_value;
  std::vector<Candidate> candidates;
  std::size_t generated = 0;
};

class SearchRun {
 public:
  SearchRun(SearchConfig config, const std::vector<BinarySequence>& initial_pool);

  // Test seams: replace generation from the GAN and/or the decoder.
  void set_generate_hook(GenerateHook hook) { generate_hook_ = std::move(hook); }
  void set_decode_hook(DecodeHook hook) { decode_hook_ = std::move(hook); }

  using CheckpointSink = std::function<void(const std::string&)>;
  enum class Status { Completed, Stopped };
  // Runs until iterations_total, or until the first epoch boundary at or past
  // `stop_after`, in which case a checkpoint is emitted and Stopped returned.
  Status run(const CheckpointSink& sink = {}, std::optional<std::uint64_t> stop_after = {});

  std::string checkpoint_text() const;
  // Rebuilds a run from checkpoint text; throws when the config digest differs.
  static SearchRun resume(SearchConfig config, const std::string& checkpoint);

  EvalResult evaluate(std::size_t count, std::size_t restarts);

  RunReport report() const;
  const SearchConfig& config() const { return config_; }
  const GanModel& model() const { return model_; }
  std::uint64_t iteration() const { return iteration_; }
  const std::vector<Candidate>& pool() const { return pool_; }

 private:
  SearchRun(SearchConfig config);

  std::vector<BinarySequence> decode_column(const Eigen::VectorXd& column, std::size_t restarts,
                                            Rng& rng) const;
  void start_phase();
  void build_dataset();
  void train_one();
  void record_eval();
  void end_phase();
  void record_finds(const std::vector<Candidate>& cands);
  void note_best(double value);

  SearchConfig config_;
  RngStreams rngs_;
  GanModel model_;
  GenerateHook generate_hook_;
  DecodeHook decode_hook_;

  std::vector<Candidate> pool_;
  std::vector<BinarySequence> union_;  // sorted canonical flats of every pool generation
  std::vector<Find> finds_;            // sorted by canonical flat
  TrainTrace trace_;
  std::vector<PoolSummary> generations_;
  std::optional<double> best_so_far_;
  std::vector<Candidate> phase_candidates_;

  std::uint64_t iteration_ = 0;
  std::size_t phase_ = 0;
  std::uint64_t phase_begin_ = 0;
  std::uint64_t last_checkpoint_ = 0;
  std::string encode_snapshot_;
  Eigen::MatrixXd dataset_;  // one flattened sample per column
  std::vector<std::size_t> order_;
};

RunReport hpgan_search(const SearchConfig& config, const std::vector<BinarySequence>& initial_pool);

EvalResult evaluate_generator(SearchRun& run, std::size_t count);

struct OracleResult {
  Score best;
  std::vector<BinarySequence> optima;  // canonical flats, sorted
  std::uint64_t states = 0;
};
// Exhaustive search over all flat sequences of the problem (at most 2^24).
OracleResult brute_force_oracle(const Problem& problem);

}  // namespace hpgan
