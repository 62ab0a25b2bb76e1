#pragma once

// Independent reference implementations used only by the tests. They work
// from the textbook definitions with plain loops and share no code with the
// library beyond the BinarySequence container.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <set>
#include <utility>
#include <vector>

#include "hpgan/seqcore.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

inline std::vector<int> ints(const hpgan::BinarySequence& s) {
  return std::vector<int>(s.symbols().begin(), s.symbols().end());
}

// sum over n of a(n) b(n + tau), skipping out-of-range terms.
inline long xcorr(const std::vector<int>& a, const std::vector<int>& b, int tau) {
  const int n = static_cast<int>(a.size());
  long sum = 0;
  for (int i = 0; i < n; ++i) {
    const int j = i + tau;
    if (j >= 0 && j < n) sum += a[i] * b[j];
  }
  return sum;
}

// Metric from the definition: off-peak auto sums per user plus every
// cross-user sum at every shift, in absolute value.
inline long moccs_metric(const std::vector<std::vector<std::vector<int>>>& set) {
  const int n = static_cast<int>(set[0][0].size());
  long total = 0;
  for (std::size_t j1 = 0; j1 < set.size(); ++j1) {
    for (std::size_t j2 = j1; j2 < set.size(); ++j2) {
      for (int tau = -(n - 1); tau <= n - 1; ++tau) {
        if (j1 == j2 && tau == 0) continue;
        long s = 0;
        for (std::size_t m = 0; m < set[j1].size(); ++m) s += xcorr(set[j1][m], set[j2][m], tau);
        total += std::labs(s);
      }
    }
  }
  return total;
}

inline std::vector<std::vector<std::vector<int>>> grid(const hpgan::SequenceSet& s) {
  std::vector<std::vector<std::vector<int>>> out(s.users());
  for (std::size_t j = 0; j < s.users(); ++j) {
    for (std::size_t m = 0; m < s.channels(); ++m) out[j].push_back(ints(s.at(j, m)));
  }
  return out;
}

// R = sum over n != 0 of (J_n s)(J_n s)^T with J_n the n-step shift matrix.
inline Mat r_shift_sum(const std::vector<int>& s) {
  const int n = static_cast<int>(s.size());
  Mat r(n, Vec(n, 0.0));
  for (int shift = -(n - 1); shift <= n - 1; ++shift) {
    if (shift == 0) continue;
    Vec v(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const int k = i - shift;
      if (k >= 0 && k < n) v[i] = s[k];
    }
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) r[i][k] += v[i] * v[k];
  }
  return r;
}

// Gaussian elimination with partial pivoting.
inline Vec solve(Mat a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

inline double gamma_mmf(const std::vector<int>& s) {
  const Vec sv(s.begin(), s.end());
  const Vec x = solve(r_shift_sum(s), sv);
  double g = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) g += sv[i] * x[i];
  return g;
}

inline double merit_factor(const std::vector<int>& s) {
  const int n = static_cast<int>(s.size());
  double side = 0.0;
  for (int k = 1; k < n; ++k) side += static_cast<double>(xcorr(s, s, k) * xcorr(s, s, k));
  return static_cast<double>(n) * n / (2.0 * side);
}

inline double pmepr(const std::vector<int>& s, int oversampling) {
  const std::size_t n = s.size();
  const std::size_t grid = n * static_cast<std::size_t>(oversampling);
  double peak = 0.0;
  for (std::size_t t = 0; t < grid; ++t) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += static_cast<double>(s[k]) *
             std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k * t) /
                                 static_cast<double>(grid));
    }
    peak = std::max(peak, std::norm(acc));
  }
  return peak / static_cast<double>(n);
}

// All ordered Golay pairs of length n by exhaustive search over 2^n sequences.
inline std::set<std::pair<std::vector<int>, std::vector<int>>> golay_pairs(int n) {
  std::vector<std::vector<int>> seqs;
  std::vector<std::vector<long>> aaf;
  for (int m = 0; m < (1 << n); ++m) {
    std::vector<int> s(n);
    for (int i = 0; i < n; ++i) s[i] = (m >> i) & 1 ? -1 : 1;
    std::vector<long> a(n);
    for (int k = 1; k < n; ++k) a[k] = xcorr(s, s, k);
    seqs.push_back(s);
    aaf.push_back(a);
  }
  std::set<std::pair<std::vector<int>, std::vector<int>>> out;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (std::size_t j = 0; j < seqs.size(); ++j) {
      bool ok = true;
      for (int k = 1; k < n && ok; ++k) ok = aaf[i][k] + aaf[j][k] == 0;
      if (ok) out.insert({seqs[i], seqs[j]});
    }
  }
  return out;
}

}  // namespace oracle
