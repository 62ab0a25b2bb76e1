#pragma once

// Known reference vectors and the pass/fail table built on them.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpgan/seqcore.hpp"

namespace hpgan::reference {

// 59-bit radar code, bits mapped 1 -> +1, 0 -> -1.
BinarySequence radar_hpgan59();
inline constexpr double kRadarHpgan59Gamma = 45.16;

// Length-15 Z-complementary pairs.
Flock obzcp_type1();
Flock obzcp_type2();
Flock obzcp_suboptimal();

// Length-15 sequence with PMEPR 5/3.
BinarySequence low_pmepr15();

// Three-neuron network: W (symmetric), b, start state and its synchronous
// successor.
Eigen::Matrix3d example_weights();
Eigen::Vector3d example_bias();
BinarySequence example_start();
BinarySequence example_sync_next();

// Two stored patterns, their encoding, and a perturbed generated matrix whose
// attractors are {+-x1, +-x2}.
BinarySequence stored_x1();
BinarySequence stored_x2();
Eigen::Matrix3d stored_encoding();
Eigen::Matrix3d perturbed_encoding();

struct CheckRow {
  std::string name;
  std::string expected;
  std::string actual;
  bool pass = false;
};

// Every reference value this library can reproduce, checked against the
// library's own implementation.
std::vector<CheckRow> verify_all(int oversampling = kDefaultOversampling);

}  // namespace hpgan::reference
