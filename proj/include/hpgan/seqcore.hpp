#pragma once

// Correlation metrics over +/-1 sequences. Everything here is a pure function
// of its arguments and is used as ground truth by the rest of the library.

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hpgan {

class BinarySequence {
 public:
  BinarySequence() = default;
  // Throws std::invalid_argument unless every value is -1 or +1 and the list
  // is nonempty.
  explicit BinarySequence(std::vector<int> symbols);
  BinarySequence(std::initializer_list<int> symbols)
      : BinarySequence(std::vector<int>(symbols)) {}

  // "+-+" style text, or "101" style text with 1 -> +1 and 0 -> -1.
  static BinarySequence from_signs(std::string_view text);
  static BinarySequence from_bits(std::string_view text);

  std::size_t size() const { return symbols_.size(); }
  int operator[](std::size_t i) const { return symbols_[i]; }
  std::span<const std::int8_t> symbols() const { return symbols_; }

  BinarySequence negated() const;
  BinarySequence reversed() const;
  // Representative of {x, -x} whose first element is +1.
  BinarySequence canonical() const;

  std::string to_signs() const;
  std::string to_bits() const;

  friend bool operator==(const BinarySequence&, const BinarySequence&) = default;
  friend auto operator<=>(const BinarySequence&, const BinarySequence&) = default;

 private:
  std::vector<std::int8_t> symbols_;
};

using Flock = std::vector<BinarySequence>;

// J users x M channels of equal-length sequences, stored row-major so that a
// user's flock is contiguous.
class SequenceSet {
 public:
  SequenceSet() = default;
  SequenceSet(std::size_t users, std::size_t channels, std::vector<BinarySequence> grid);

  std::size_t users() const { return users_; }
  std::size_t channels() const { return channels_; }
  std::size_t length() const { return grid_.front().size(); }

  const BinarySequence& at(std::size_t user, std::size_t channel) const {
    return grid_[user * channels_ + channel];
  }
  std::span<const BinarySequence> flock(std::size_t user) const {
    return std::span<const BinarySequence>(grid_).subspan(user * channels_, channels_);
  }
  const std::vector<BinarySequence>& sequences() const { return grid_; }

  friend bool operator==(const SequenceSet&, const SequenceSet&) = default;
  friend auto operator<=>(const SequenceSet&, const SequenceSet&) = default;

 private:
  std::size_t users_ = 0;
  std::size_t channels_ = 0;
  std::vector<BinarySequence> grid_;
};

struct CorrelationReport {
  std::size_t length = 0;
  // aaf[j][tau + N - 1]
  std::vector<std::vector<long>> aaf;
  // acf[pair][tau + N - 1] for pairs (j1 < j2) in lexicographic order.
  std::vector<std::vector<long>> acf;
  long metric_total = 0;
};

struct ZcpProfile {
  std::size_t front_zcz = 1;
  std::size_t tail_zcz = 1;
  long out_of_zone_max = 0;
  std::vector<double> pmepr_per_sequence;

  std::size_t zcz_width() const { return front_zcz > tail_zcz ? front_zcz : tail_zcz; }
};

struct MmfSolution {
  Eigen::MatrixXd r_matrix;
  Eigen::VectorXd mmf_weights;
  double gamma_mmf = 0.0;
  // Unset when the matched-filter denominator is zero.
  std::optional<double> gamma_mf;
  // True when the Cholesky factorization was rejected and the pivoted
  // elimination was used instead.
  bool used_pivoting_fallback = false;
};

inline constexpr int kDefaultOversampling = 64;

// Row-major flattening: index = (j * M + m) * N + n.
BinarySequence flatten(const SequenceSet& set);
SequenceSet unflatten(const BinarySequence& flat, std::size_t users, std::size_t channels,
                      std::size_t length);

// Sum over n of a(n) b(n + tau); for tau < 0 the roles are transposed so that
// xcorr(a, b, -tau) == xcorr(b, a, tau).
long aperiodic_xcorr(const BinarySequence& a, const BinarySequence& b, int tau);

long aaf_sum(std::span<const BinarySequence> flock, int tau);
long acf_sum(std::span<const BinarySequence> flock1, std::span<const BinarySequence> flock2,
             int tau);

CorrelationReport correlation_report(const SequenceSet& set);
long moccs_metric(const SequenceSet& set);

double pmepr(const BinarySequence& s, int oversampling = kDefaultOversampling);
ZcpProfile zcp_profile(std::span<const BinarySequence> pair,
                       int oversampling = kDefaultOversampling);

// Matched-filter signal-to-interference ratio (the merit factor).
double mf_sir(const BinarySequence& s);

// R = sum over n != 0 of (J_n s)(J_n s)^T.
Eigen::MatrixXd build_r_matrix(const BinarySequence& s);
MmfSolution mmf_sir(const BinarySequence& s);
// gamma_mmf only; skips building the MmfSolution copy of R.
double mmf_gamma(const BinarySequence& s);

}  // namespace hpgan
