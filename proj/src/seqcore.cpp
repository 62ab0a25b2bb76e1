#include "hpgan/seqcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hpgan {

// ---------------------------------------------------------------------------
// BinarySequence / SequenceSet

BinarySequence::BinarySequence(std::vector<int> symbols) {
  if (symbols.empty()) throw std::invalid_argument("BinarySequence: empty sequence");
  symbols_.reserve(symbols.size());
  for (int v : symbols) {
    if (v != 1 && v != -1) {
      throw std::invalid_argument("BinarySequence: symbol " + std::to_string(v) +
                                  " is not +1 or -1");
    }
    symbols_.push_back(static_cast<std::int8_t>(v));
  }
}

BinarySequence BinarySequence::from_signs(std::string_view text) {
  std::vector<int> v;
  v.reserve(text.size());
  for (char c : text) {
    if (c == '+') {
      v.push_back(1);
    } else if (c == '-') {
      v.push_back(-1);
    } else {
      throw std::invalid_argument(std::string("BinarySequence: unexpected character '") + c +
                                  "' in sign string");
    }
  }
  return BinarySequence(std::move(v));
}

BinarySequence BinarySequence::from_bits(std::string_view text) {
  std::vector<int> v;
  v.reserve(text.size());
  for (char c : text) {
    if (c == '1') {
      v.push_back(1);
    } else if (c == '0') {
      v.push_back(-1);
    } else {
      throw std::invalid_argument(std::string("BinarySequence: unexpected character '") + c +
                                  "' in bit string");
    }
  }
  return BinarySequence(std::move(v));
}

BinarySequence BinarySequence::negated() const {
  BinarySequence out = *this;
  for (auto& v : out.symbols_) v = static_cast<std::int8_t>(-v);
  return out;
}

BinarySequence BinarySequence::reversed() const {
  BinarySequence out = *this;
  std::reverse(out.symbols_.begin(), out.symbols_.end());
  return out;
}

BinarySequence BinarySequence::canonical() const {
  return symbols_.front() == 1 ? *this : negated();
}

std::string BinarySequence::to_signs() const {
  std::string s;
  s.reserve(size());
  for (auto v : symbols_) s.push_back(v > 0 ? '+' : '-');
  return s;
}

std::string BinarySequence::to_bits() const {
  std::string s;
  s.reserve(size());
  for (auto v : symbols_) s.push_back(v > 0 ? '1' : '0');
  return s;
}

SequenceSet::SequenceSet(std::size_t users, std::size_t channels,
                         std::vector<BinarySequence> grid)
    : users_(users), channels_(channels), grid_(std::move(grid)) {
  if (users == 0 || channels == 0) {
    throw std::invalid_argument("SequenceSet: users and channels must be >= 1");
  }
  if (grid_.size() != users * channels) {
    throw std::invalid_argument("SequenceSet: expected " + std::to_string(users * channels) +
                                " sequences, got " + std::to_string(grid_.size()));
  }
  for (const auto& s : grid_) {
    if (s.size() == 0) throw std::invalid_argument("SequenceSet: empty member sequence");
    if (s.size() != grid_.front().size()) {
      throw std::invalid_argument("SequenceSet: member sequences differ in length");
    }
  }
}

BinarySequence flatten(const SequenceSet& set) {
  std::vector<int> out;
  out.reserve(set.users() * set.channels() * set.length());
  for (const auto& s : set.sequences()) out.insert(out.end(), s.symbols().begin(), s.symbols().end());
  return BinarySequence(std::move(out));
}

SequenceSet unflatten(const BinarySequence& flat, std::size_t users, std::size_t channels,
                      std::size_t length) {
  if (flat.size() != users * channels * length) {
    throw std::invalid_argument("unflatten: sequence of length " + std::to_string(flat.size()) +
                                " cannot be split into " + std::to_string(users) + "x" +
                                std::to_string(channels) + "x" + std::to_string(length));
  }
  std::vector<BinarySequence> grid;
  grid.reserve(users * channels);
  auto sym = flat.symbols();
  for (std::size_t k = 0; k < users * channels; ++k) {
    grid.emplace_back(std::vector<int>(sym.begin() + static_cast<std::ptrdiff_t>(k * length),
                                       sym.begin() + static_cast<std::ptrdiff_t>((k + 1) * length)));
  }
  return SequenceSet(users, channels, std::move(grid));
}

// ---------------------------------------------------------------------------
// Correlations

long aperiodic_xcorr(const BinarySequence& a, const BinarySequence& b, int tau) {
  const long n = static_cast<long>(a.size());
  if (a.size() != b.size()) {
    throw std::invalid_argument("aperiodic_xcorr: length mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  if (std::abs(tau) >= n) {
    throw std::invalid_argument("aperiodic_xcorr: |tau| = " + std::to_string(std::abs(tau)) +
                                " must be < N = " + std::to_string(n));
  }
  auto x = a.symbols();
  auto y = b.symbols();
  long acc = 0;
  if (tau >= 0) {
    for (long i = 0; i + tau < n; ++i) acc += x[i] * y[i + tau];
  } else {
    const long t = -tau;
    for (long i = 0; i + t < n; ++i) acc += x[i + t] * y[i];
  }
  return acc;
}

namespace {

std::size_t common_length(std::span<const BinarySequence> flock, const char* who) {
  if (flock.empty()) throw std::invalid_argument(std::string(who) + ": empty flock");
  const std::size_t n = flock.front().size();
  for (const auto& s : flock) {
    if (s.size() != n) throw std::invalid_argument(std::string(who) + ": mixed lengths");
  }
  return n;
}

}  // namespace

long aaf_sum(std::span<const BinarySequence> flock, int tau) {
  common_length(flock, "aaf_sum");
  long acc = 0;
  for (const auto& s : flock) acc += aperiodic_xcorr(s, s, tau);
  return acc;
}

long acf_sum(std::span<const BinarySequence> flock1, std::span<const BinarySequence> flock2,
             int tau) {
  if (flock1.size() != flock2.size()) {
    throw std::invalid_argument("acf_sum: flock sizes differ");
  }
  const auto n1 = common_length(flock1, "acf_sum");
  const auto n2 = common_length(flock2, "acf_sum");
  if (n1 != n2) throw std::invalid_argument("acf_sum: flocks differ in length");
  long acc = 0;
  for (std::size_t m = 0; m < flock1.size(); ++m) {
    acc += aperiodic_xcorr(flock1[m], flock2[m], tau);
  }
  return acc;
}

CorrelationReport correlation_report(const SequenceSet& set) {
  CorrelationReport rep;
  const int n = static_cast<int>(set.length());
  rep.length = set.length();
  const std::size_t width = 2 * static_cast<std::size_t>(n) - 1;

  for (std::size_t j = 0; j < set.users(); ++j) {
    std::vector<long> row(width, 0);
    for (int tau = 0; tau < n; ++tau) {
      const long v = aaf_sum(set.flock(j), tau);
      row[tau + n - 1] = v;
      row[-tau + n - 1] = v;
      if (tau != 0) rep.metric_total += 2 * std::abs(v);
    }
    rep.aaf.push_back(std::move(row));
  }
  for (std::size_t j1 = 0; j1 < set.users(); ++j1) {
    for (std::size_t j2 = j1 + 1; j2 < set.users(); ++j2) {
      std::vector<long> row(width, 0);
      for (int tau = -n + 1; tau < n; ++tau) {
        const long v = acf_sum(set.flock(j1), set.flock(j2), tau);
        row[tau + n - 1] = v;
        rep.metric_total += std::abs(v);
      }
      rep.acf.push_back(std::move(row));
    }
  }
  return rep;
}

long moccs_metric(const SequenceSet& set) { return correlation_report(set).metric_total; }

// ---------------------------------------------------------------------------
// PMEPR / ZCP

double pmepr(const BinarySequence& s, int oversampling) {
  if (oversampling < 4) {
    throw std::invalid_argument("pmepr: oversampling must be >= 4, got " +
                                std::to_string(oversampling));
  }
  const std::size_t n = s.size();
  const std::size_t grid = n * static_cast<std::size_t>(oversampling);
  std::vector<double> cos_table(grid), sin_table(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(grid);
    cos_table[k] = std::cos(phase);
    sin_table[k] = std::sin(phase);
  }
  double peak = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      re += s[i] * cos_table[idx];
      im += s[i] * sin_table[idx];
      idx += k;
      if (idx >= grid) idx %= grid;
    }
    peak = std::max(peak, re * re + im * im);
  }
  return peak / static_cast<double>(n);
}

ZcpProfile zcp_profile(std::span<const BinarySequence> pair, int oversampling) {
  if (pair.size() != 2) {
    throw std::invalid_argument("zcp_profile: expected 2 sequences, got " +
                                std::to_string(pair.size()));
  }
  const std::size_t n = common_length(pair, "zcp_profile");
  if (n % 2 == 0) {
    throw std::invalid_argument("zcp_profile: length " + std::to_string(n) + " is even");
  }
  std::vector<long> sums(n, 0);
  for (std::size_t tau = 1; tau < n; ++tau) sums[tau] = aaf_sum(pair, static_cast<int>(tau));

  ZcpProfile p;
  p.front_zcz = 1;
  while (p.front_zcz < n && sums[p.front_zcz] == 0) ++p.front_zcz;
  p.tail_zcz = 1;
  while (p.tail_zcz < n && sums[n - p.tail_zcz] == 0) ++p.tail_zcz;

  // Out-of-zone shifts are measured against the wider of the two zones.
  std::size_t lo = 1, hi = n;  // half-open [lo, hi) of out-of-zone shifts
  if (p.front_zcz >= p.tail_zcz) {
    lo = p.front_zcz;
  } else {
    hi = n - p.tail_zcz + 1;
  }
  p.out_of_zone_max = 0;
  for (std::size_t tau = lo; tau < hi; ++tau) {
    p.out_of_zone_max = std::max(p.out_of_zone_max, std::abs(sums[tau]));
  }
  for (const auto& s : pair) p.pmepr_per_sequence.push_back(pmepr(s, oversampling));
  return p;
}

// ---------------------------------------------------------------------------
// Radar SIR

namespace {

std::vector<long> autocorrelations(const BinarySequence& s) {
  std::vector<long> c(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) c[k] = aperiodic_xcorr(s, s, static_cast<int>(k));
  return c;
}

}  // namespace

double mf_sir(const BinarySequence& s) {
  const std::size_t n = s.size();
  if (n < 2) throw std::invalid_argument("mf_sir: sequence length must be >= 2");
  const auto c = autocorrelations(s);
  double sidelobes = 0.0;
  for (std::size_t k = 1; k < n; ++k) sidelobes += static_cast<double>(c[k] * c[k]);
  if (sidelobes == 0.0) throw std::domain_error("mf_sir: all sidelobes are zero");
  const double energy = static_cast<double>(n);
  return energy * energy / (2.0 * sidelobes);
}

Eigen::MatrixXd build_r_matrix(const BinarySequence& s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  if (n < 2) throw std::invalid_argument("build_r_matrix: sequence length must be >= 2");
  // Summing (J_n s)(J_n s)^T over every shift including n = 0 gives the
  // Toeplitz matrix of aperiodic autocorrelations; drop the n = 0 term.
  const auto c = autocorrelations(s);
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      r(i, k) = static_cast<double>(c[static_cast<std::size_t>(std::abs(i - k))] - s[i] * s[k]);
    }
  }
  return r;
}

namespace {

struct SolveResult {
  Eigen::VectorXd x;
  bool fallback = false;
};

SolveResult solve_symmetric(const Eigen::MatrixXd& r, const Eigen::VectorXd& rhs) {
  const auto n = static_cast<double>(r.rows());
  const double norm_inf = r.cwiseAbs().rowwise().sum().maxCoeff();
  const double threshold = n * std::numeric_limits<double>::epsilon() * norm_inf;

  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() == Eigen::Success) {
    const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
    if (diag.array().square().minCoeff() > threshold) return {llt.solve(rhs), false};
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(r);
  const Eigen::MatrixXd u = lu.matrixLU().triangularView<Eigen::Upper>();
  const double min_pivot = u.diagonal().cwiseAbs().minCoeff();
  if (min_pivot <= threshold) {
    std::ostringstream msg;
    msg << "mmf_sir: R is numerically singular (reciprocal condition estimate " << lu.rcond()
        << ", smallest pivot " << min_pivot << " <= threshold " << threshold << ")";
    throw std::domain_error(msg.str());
  }
  return {lu.solve(rhs), true};
}

Eigen::VectorXd as_vector(const BinarySequence& s) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

}  // namespace

MmfSolution mmf_sir(const BinarySequence& s) {
  MmfSolution sol;
  sol.r_matrix = build_r_matrix(s);
  const Eigen::VectorXd sv = as_vector(s);
  auto solved = solve_symmetric(sol.r_matrix, sv);
  sol.mmf_weights = std::move(solved.x);
  sol.used_pivoting_fallback = solved.fallback;
  sol.gamma_mmf = sv.dot(sol.mmf_weights);
  try {
    sol.gamma_mf = mf_sir(s);
  } catch (const std::domain_error&) {
    sol.gamma_mf.reset();
  }
  return sol;
}

double mmf_gamma(const BinarySequence& s) {
  const Eigen::VectorXd sv = as_vector(s);
  return sv.dot(solve_symmetric(build_r_matrix(s), sv).x);
}

}  // namespace hpgan
