#include "hpgan/datagen.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace hpgan {

namespace {

bool is_complementary(const Flock& flock) {
  const int n = static_cast<int>(flock.front().size());
  for (int tau = 1; tau < n; ++tau) {
    if (aaf_sum(flock, tau) != 0) return false;
  }
  return true;
}

BinarySequence alternate_signs(const BinarySequence& s) {
  std::vector<int> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = (i % 2 == 0) ? s[i] : -s[i];
  return BinarySequence(std::move(out));
}

// Alternate blocks of `block` symbols from a and b. block = 1 is plain
// interleaving, block = a.size() is concatenation; the intermediate sizes
// reach the Golay sequences the two extremes miss from length 16 on.
BinarySequence block_interleave(const BinarySequence& a, const BinarySequence& b,
                                std::size_t block) {
  std::vector<int> out;
  out.reserve(a.size() * 2);
  for (std::size_t start = 0; start < a.size(); start += block) {
    for (std::size_t i = start; i < start + block; ++i) out.push_back(a[i]);
    for (std::size_t i = start; i < start + block; ++i) out.push_back(b[i]);
  }
  return BinarySequence(std::move(out));
}

// Closure of a set of ordered pairs under the GCP-preserving symmetries.
std::set<Flock> pair_closure(std::set<Flock> pairs) {
  std::vector<Flock> frontier(pairs.begin(), pairs.end());
  while (!frontier.empty()) {
    std::vector<Flock> next;
    for (const auto& p : frontier) {
      const auto& a = p[0];
      const auto& b = p[1];
      const Flock images[] = {
          {b, a},
          {a.negated(), b},
          {a, b.negated()},
          {a.reversed(), b},
          {a, b.reversed()},
          {alternate_signs(a), alternate_signs(b)},
      };
      for (const auto& img : images) {
        if (pairs.insert(img).second) next.push_back(img);
      }
    }
    frontier = std::move(next);
  }
  return pairs;
}

SequenceSet moccs_from(const Flock& user1, const Flock& user2) {
  return SequenceSet(2, 2, {user1[0], user1[1], user2[0], user2[1]});
}

}  // namespace

std::vector<Flock> golay_pairs(std::size_t length) {
  if (length != 2 && length != 4 && length != 8 && length != 16) {
    throw std::invalid_argument("golay_pairs: unsupported length " + std::to_string(length) +
                                " (expected 2, 4, 8 or 16)");
  }
  std::set<Flock> level = pair_closure({Flock{{1, 1}, {1, -1}}});
  for (std::size_t n = 2; n < length; n *= 2) {
    std::set<Flock> grown;
    for (const auto& p : level) {
      for (std::size_t block = 1; block <= n; block *= 2) {
        grown.insert({block_interleave(p[0], p[1], block),
                      block_interleave(p[0], p[1].negated(), block)});
      }
    }
    level = pair_closure(std::move(grown));
  }
  std::vector<Flock> out(level.begin(), level.end());
  for (const auto& p : out) {
    if (!is_complementary(p)) throw std::logic_error("golay_pairs: construction produced a non-GCP");
  }
  return out;
}

Flock golay_mate(const Flock& pair) {
  if (pair.size() != 2) throw std::invalid_argument("golay_mate: expected a pair");
  return {pair[1].reversed(), pair[0].reversed().negated()};
}

std::vector<SequenceSet> moccs_candidates() {
  std::set<SequenceSet> sets;
  for (const auto& p : golay_pairs(8)) {
    const Flock mate = golay_mate(p);
    // Diversify: negate either user's flock, negate a channel across users,
    // swap users.
    for (int mask = 0; mask < 16; ++mask) {
      Flock u1 = p;
      Flock u2 = mate;
      if (mask & 1) u1 = {u1[0].negated(), u1[1].negated()};
      if (mask & 2) u2 = {u2[0].negated(), u2[1].negated()};
      if (mask & 4) {
        u1[0] = u1[0].negated();
        u2[0] = u2[0].negated();
      }
      if (mask & 8) std::swap(u1, u2);
      sets.insert(moccs_from(u1, u2));
    }
  }
  std::vector<SequenceSet> out;
  out.reserve(sets.size());
  for (const auto& s : sets) {
    if (moccs_metric(s) != 0) throw std::logic_error("moccs_candidates: nonzero metric");
    out.push_back(s);
  }
  return out;
}

std::vector<SequenceSet> moccs_train_set(std::size_t count, Rng& rng) {
  auto candidates = moccs_candidates();
  if (count > candidates.size()) {
    throw std::invalid_argument("moccs_train_set: requested " + std::to_string(count) +
                                " sets but only " + std::to_string(candidates.size()) +
                                " are constructible");
  }
  rng.shuffle(candidates);
  candidates.resize(count);
  return candidates;
}

Flock canonical_pair(const Flock& pair) {
  if (pair.size() != 2) throw std::invalid_argument("canonical_pair: expected a pair");
  const Flock options[] = {
      {pair[0], pair[1]},
      {pair[1], pair[0]},
      {pair[0].negated(), pair[1].negated()},
      {pair[1].negated(), pair[0].negated()},
  };
  return *std::min_element(std::begin(options), std::end(options));
}

std::vector<Flock> obzcp_train_set(int oversampling) {
  constexpr std::size_t kCount = 128;
  constexpr std::size_t kMaxZcz = 4;
  constexpr double kPmeprFloor = 5.0 / 3.0 + 1e-6;

  std::set<Flock> truncated;
  for (const auto& p : golay_pairs(16)) {
    std::vector<int> a(p[0].symbols().begin(), p[0].symbols().end());
    std::vector<int> b(p[1].symbols().begin(), p[1].symbols().end());
    truncated.insert(canonical_pair({BinarySequence(std::vector<int>(a.begin() + 1, a.end())),
                                     BinarySequence(std::vector<int>(b.begin() + 1, b.end()))}));
    truncated.insert(canonical_pair({BinarySequence(std::vector<int>(a.begin(), a.end() - 1)),
                                     BinarySequence(std::vector<int>(b.begin(), b.end() - 1))}));
  }

  std::map<BinarySequence, double> pm_cache;
  auto pm = [&](const BinarySequence& s) {
    auto it = pm_cache.find(s);
    if (it == pm_cache.end()) it = pm_cache.emplace(s, pmepr(s, oversampling)).first;
    return it->second;
  };

  struct Eligible {
    double min_pmepr;
    Flock pair;
  };
  std::vector<Eligible> eligible;
  for (const auto& pair : truncated) {
    const auto prof = zcp_profile(pair, 4);  // its PMEPR is ignored; see pm()
    if (prof.zcz_width() > kMaxZcz) continue;
    const double lo = std::min(pm(pair[0]), pm(pair[1]));
    if (lo <= kPmeprFloor) continue;
    eligible.push_back({lo, pair});
  }
  std::sort(eligible.begin(), eligible.end(), [](const Eligible& x, const Eligible& y) {
    if (x.min_pmepr != y.min_pmepr) return x.min_pmepr < y.min_pmepr;
    return x.pair < y.pair;
  });
  if (eligible.size() < kCount) {
    throw std::logic_error("obzcp_train_set: only " + std::to_string(eligible.size()) +
                           " eligible pairs");
  }
  std::vector<Flock> out;
  out.reserve(kCount);
  for (std::size_t i = 0; i < kCount; ++i) out.push_back(eligible[i].pair);
  return out;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

BinarySequence legendre(std::uint64_t p) {
  if (p < 3 || !is_prime(p)) {
    throw std::invalid_argument("legendre: " + std::to_string(p) + " is not an odd prime");
  }
  std::vector<int> s(p, -1);
  s[0] = 1;
  for (std::uint64_t x = 1; x < p; ++x) s[(x * x) % p] = 1;
  return BinarySequence(std::move(s));
}

BinarySequence rotate_left(const BinarySequence& s, std::size_t shift) {
  std::vector<int> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[(i + shift) % s.size()];
  return BinarySequence(std::move(out));
}

RotatedLegendre legendre_best_rotation(std::uint64_t p) {
  const BinarySequence base = legendre(p);
  RotatedLegendre best{base, 0, mmf_gamma(base)};
  for (std::size_t r = 1; r < base.size(); ++r) {
    BinarySequence s = rotate_left(base, r);
    const double g = mmf_gamma(s);
    if (g > best.gamma_mmf) best = {std::move(s), r, g};
  }
  return best;
}

BinarySequence barker13() { return {1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1}; }

void GaConfig::validate() const {
  if (population_size < 2) throw std::invalid_argument("GaConfig: population_size must be >= 2");
  if (tournament_size < 1 || tournament_size > population_size) {
    throw std::invalid_argument("GaConfig: tournament_size must lie in [1, population_size]");
  }
  if (crossover_rate < 0.0 || crossover_rate > 1.0) {
    throw std::invalid_argument("GaConfig: crossover_rate outside [0, 1]");
  }
  if (mutation_rate && (*mutation_rate < 0.0 || *mutation_rate > 1.0)) {
    throw std::invalid_argument("GaConfig: mutation_rate outside [0, 1]");
  }
  if (band_low > band_high) throw std::invalid_argument("GaConfig: band_low exceeds band_high");
  if (fitness == GaFitness::MoccsMetric && (users == 0 || channels == 0)) {
    throw std::invalid_argument("GaConfig: MOCCS fitness needs users, channels >= 1");
  }
}

double ga_fitness(const GaConfig& config, const BinarySequence& s) {
  if (config.fitness == GaFitness::MoccsMetric) {
    const std::size_t cells = config.users * config.channels;
    if (s.size() % cells != 0) {
      throw std::invalid_argument("ga_fitness: length not divisible by users * channels");
    }
    return static_cast<double>(
        moccs_metric(unflatten(s, config.users, config.channels, s.size() / cells)));
  }
  try {
    return mmf_gamma(s);
  } catch (const std::exception&) {
    return 0.0;  // singular R: worst possible score
  }
}

bool ga_better(const GaConfig& config, double a, double b) {
  return config.fitness == GaFitness::MoccsMetric ? a < b : a > b;
}

std::vector<BinarySequence> random_population(std::size_t size, std::size_t length, Rng& rng) {
  std::vector<BinarySequence> pop;
  pop.reserve(size);
  std::vector<int> bits(length);
  for (std::size_t i = 0; i < size; ++i) {
    for (auto& b : bits) b = rng.sign();
    pop.emplace_back(bits);
  }
  return pop;
}

GaResult ga_search(const GaConfig& config, std::size_t length, Rng& rng) {
  config.validate();
  if (length < 2) throw std::invalid_argument("ga_search: length must be >= 2");
  const double mutation = config.mutation_rate.value_or(1.0 / static_cast<double>(length));

  std::vector<ScoredSequence> pop;
  for (auto& s : random_population(config.population_size, length, rng)) {
    const double f = ga_fitness(config, s);
    pop.push_back({std::move(s), f});
  }

  GaResult result;
  std::set<BinarySequence> archived;
  std::set<BinarySequence> seen;
  auto observe = [&](const ScoredSequence& m) {
    const auto c = m.sequence.canonical();
    seen.insert(c);
    if (m.fitness >= config.band_low && m.fitness <= config.band_high &&
        archived.insert(c).second) {
      result.archive.push_back({c, m.fitness});
    }
  };
  for (const auto& m : pop) observe(m);
  auto band_full = [&] {
    return config.band_target > 0 && result.archive.size() >= config.band_target;
  };

  auto tournament = [&]() -> const ScoredSequence& {
    const ScoredSequence* best = nullptr;
    for (std::size_t t = 0; t < config.tournament_size; ++t) {
      const auto& cand = pop[rng.below(pop.size())];
      if (best == nullptr || ga_better(config, cand.fitness, best->fitness)) best = &cand;
    }
    return *best;
  };
  auto mutate = [&](std::vector<int>& bits) {
    for (auto& b : bits) {
      if (rng.uniform01() < mutation) b = -b;
    }
  };

  std::size_t gen = 0;
  for (; gen < config.generations && !band_full(); ++gen) {
    std::vector<ScoredSequence> next;
    next.reserve(pop.size());
    next.push_back(*std::min_element(pop.begin(), pop.end(), [&](const auto& x, const auto& y) {
      return ga_better(config, x.fitness, y.fitness);
    }));
    while (next.size() < pop.size()) {
      const auto& pa = tournament();
      const auto& pb = tournament();
      std::vector<int> c1(pa.sequence.symbols().begin(), pa.sequence.symbols().end());
      std::vector<int> c2(pb.sequence.symbols().begin(), pb.sequence.symbols().end());
      if (rng.uniform01() < config.crossover_rate) {
        const std::size_t cut = 1 + rng.below(length - 1);
        std::swap_ranges(c1.begin() + static_cast<std::ptrdiff_t>(cut), c1.end(),
                         c2.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (auto* child : {&c1, &c2}) {
        if (next.size() >= pop.size()) break;
        mutate(*child);
        BinarySequence s(*child);
        const double f = ga_fitness(config, s);
        next.push_back({std::move(s), f});
        observe(next.back());
      }
    }
    pop = std::move(next);
  }
  result.generations_run = gen;
  result.distinct_members = seen.size();

  std::sort(pop.begin(), pop.end(), [&](const ScoredSequence& x, const ScoredSequence& y) {
    if (x.fitness != y.fitness) return ga_better(config, x.fitness, y.fitness);
    return x.sequence.canonical() < y.sequence.canonical();
  });
  std::set<BinarySequence> kept;
  for (auto& m : pop) {
    auto c = m.sequence.canonical();
    if (kept.insert(c).second) result.population.push_back({std::move(c), m.fitness});
  }
  return result;
}

}  // namespace hpgan
