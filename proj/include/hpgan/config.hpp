#pragma once

// Flat "key = value" run configuration. Unknown or repeated keys are errors.
// '#' starts a comment line. See README for the key list.

#include <string>
#include <vector>

#include "hpgan/datagen.hpp"
#include "hpgan/search.hpp"

namespace hpgan {

// Where the initial training pool comes from.
//   moccs      moccs_train_set(pool_size)
//   golay      pool_size random length-N Golay pairs (J=1, M=2), distinct modulo negation
//   obzcp      obzcp_train_set()
//   ga         GA archive for the radar problem
//   file:PATH  a pool file (see seqio.hpp)
struct PoolSource {
  std::string kind = "moccs";
  std::string path;
  std::size_t pool_size = 200;
  GaConfig ga;
};

struct RunConfig {
  SearchConfig search;
  PoolSource pool;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Every key with its effective value; parse_config(canonical) reproduces it.
std::string config_text(const RunConfig& config);

// Builds the initial pool as flat sequences, drawing randomness from the
// run seed's "ga" stream.
std::vector<BinarySequence> build_initial_pool(const RunConfig& config);

}  // namespace hpgan
