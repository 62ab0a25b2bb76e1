#pragma once

// Training-data producers. Every emitted object is re-verified with seqcore
// before it is returned.

#include <cstdint>
#include <optional>
#include <vector>

#include "hpgan/rng.hpp"
#include "hpgan/seqcore.hpp"

namespace hpgan {

// Ordered Golay complementary pairs of length 2, 4, 8 or 16: the seed pair
// grown by block interleaving (concatenation and plain interleaving are the
// extreme block sizes), closed under the pair symmetries
// (swap, negate either, reverse either, alternating sign on both).
std::vector<Flock> golay_pairs(std::size_t length);

// Golay mate of (a, b): (reverse(b), -reverse(a)).
Flock golay_mate(const Flock& pair);

// Every distinct J=2, M=2, N=8 complementary code set reachable from the
// length-8 Golay pairs and their mates. Sorted.
std::vector<SequenceSet> moccs_candidates();

// `count` distinct sets drawn from moccs_candidates(); throws when count
// exceeds the construction capacity.
std::vector<SequenceSet> moccs_train_set(std::size_t count, Rng& rng);

// 128 odd-length Z-complementary pairs of length 15, obtained by deleting the
// first or the last element of length-16 Golay pairs. Kept: pairs with ZCZ
// width at most 4 whose members all have PMEPR above 5/3; the 128 with the
// lowest member PMEPR. PMEPR is evaluated at `oversampling`.
inline constexpr int kObzcpTrainOversampling = 8;
std::vector<Flock> obzcp_train_set(int oversampling = kObzcpTrainOversampling);

// Canonical form of a pair modulo swapping and joint negation.
Flock canonical_pair(const Flock& pair);

bool is_prime(std::uint64_t n);

// s(0) = +1, s(n) = +1 for quadratic residues mod p, -1 otherwise.
BinarySequence legendre(std::uint64_t p);
BinarySequence rotate_left(const BinarySequence& s, std::size_t shift);

struct RotatedLegendre {
  BinarySequence sequence;
  std::size_t rotation = 0;
  double gamma_mmf = 0.0;
};
// Cyclic shift of legendre(p) with the largest mismatched-filter SIR.
RotatedLegendre legendre_best_rotation(std::uint64_t p);

BinarySequence barker13();

enum class GaFitness { MoccsMetric, MmfSir };

struct GaConfig {
  std::size_t population_size = 200;
  std::size_t generations = 500;
  double crossover_rate = 0.9;
  // Per-bit flip probability; unset means 1 / length.
  std::optional<double> mutation_rate;
  std::size_t tournament_size = 4;
  GaFitness fitness = GaFitness::MmfSir;
  // Shape used to unflatten candidates for the MOCCS fitness.
  std::size_t users = 1;
  std::size_t channels = 1;
  // Archive every distinct member whose fitness lands in [band_low, band_high];
  // stop early once `band_target` members are archived (0 disables).
  double band_low = 10.0;
  double band_high = 21.0;
  std::size_t band_target = 0;

  void validate() const;
};

struct ScoredSequence {
  BinarySequence sequence;
  double fitness = 0.0;
};

struct GaResult {
  // Final population, best first, canonical and deduplicated.
  std::vector<ScoredSequence> population;
  // In-band members met during the run, in discovery order.
  std::vector<ScoredSequence> archive;
  std::size_t generations_run = 0;
  std::size_t distinct_members = 0;
};

double ga_fitness(const GaConfig& config, const BinarySequence& s);
// True when fitness a ranks strictly ahead of b.
bool ga_better(const GaConfig& config, double a, double b);

std::vector<BinarySequence> random_population(std::size_t size, std::size_t length, Rng& rng);

GaResult ga_search(const GaConfig& config, std::size_t length, Rng& rng);

}  // namespace hpgan
