#pragma once

// Line-oriented text format for sequence pools and search results.
//
//   hpgan-pool 1
//   mapping signs            (or bits: 1 -> +1, 0 -> -1)
//   shape J M N
//   # free-form annotation attached to the next group
//   ++-+...                  (J*M lines per group, row-major)
//
//   ...next group after a blank line
//
// Lines starting with '#' before a group are kept as that group's annotations.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpgan/seqcore.hpp"

namespace hpgan {

enum class SymbolMapping { Signs, Bits };

struct SequencePool {
  SymbolMapping mapping = SymbolMapping::Signs;
  std::size_t users = 1;
  std::size_t channels = 1;
  std::size_t length = 0;
  std::vector<SequenceSet> groups;
  std::vector<std::vector<std::string>> annotations;  // parallel to groups
};

class PoolParseError : public std::runtime_error {
 public:
  PoolParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr int kPoolFormatVersion = 1;

void write_pool(std::ostream& os, const SequencePool& pool);
SequencePool read_pool(std::istream& is);

SequencePool read_pool_file(const std::string& path);
void write_pool_file(const std::string& path, const SequencePool& pool);

// Pool of single-sequence groups, or of pairs, with a common length.
SequencePool pool_of_sequences(const std::vector<BinarySequence>& seqs,
                               SymbolMapping mapping = SymbolMapping::Signs);
SequencePool pool_of_sets(const std::vector<SequenceSet>& sets,
                          SymbolMapping mapping = SymbolMapping::Signs);

}  // namespace hpgan
