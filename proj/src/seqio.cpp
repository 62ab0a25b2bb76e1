#include "hpgan/seqio.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hpgan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string encode_line(const BinarySequence& s, SymbolMapping mapping) {
  return mapping == SymbolMapping::Signs ? s.to_signs() : s.to_bits();
}

}  // namespace

void write_pool(std::ostream& os, const SequencePool& pool) {
  os << "hpgan-pool " << kPoolFormatVersion << '\n';
  os << "mapping " << (pool.mapping == SymbolMapping::Signs ? "signs" : "bits") << '\n';
  os << "shape " << pool.users << ' ' << pool.channels << ' ' << pool.length << '\n';
  for (std::size_t g = 0; g < pool.groups.size(); ++g) {
    os << '\n';
    if (g < pool.annotations.size()) {
      for (const auto& a : pool.annotations[g]) os << "# " << a << '\n';
    }
    for (const auto& s : pool.groups[g].sequences()) os << encode_line(s, pool.mapping) << '\n';
  }
}

SequencePool read_pool(std::istream& is) {
  SequencePool pool;
  std::string raw;
  std::size_t lineno = 0;
  auto next_header = [&](const char* key) {
    while (std::getline(is, raw)) {
      ++lineno;
      const auto line = trim(raw);
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string word;
      ss >> word;
      if (word != key) {
        throw PoolParseError(lineno, std::string("expected '") + key + "', got '" + word + "'");
      }
      return line.substr(word.size());
    }
    throw PoolParseError(std::max<std::size_t>(lineno, 1), std::string("missing '") + key + "' header");
  };

  {
    std::istringstream ss(next_header("hpgan-pool"));
    int version = 0;
    if (!(ss >> version) || version != kPoolFormatVersion) {
      throw PoolParseError(lineno, "unsupported pool format version");
    }
  }
  {
    const auto m = trim(next_header("mapping"));
    if (m == "signs") {
      pool.mapping = SymbolMapping::Signs;
    } else if (m == "bits") {
      pool.mapping = SymbolMapping::Bits;
    } else {
      throw PoolParseError(lineno, "unknown mapping '" + m + "' (expected signs or bits)");
    }
  }
  {
    std::istringstream ss(next_header("shape"));
    long j = 0, m = 0, n = 0;
    std::string extra;
    if (!(ss >> j >> m >> n) || (ss >> extra) || j < 1 || m < 1 || n < 1) {
      throw PoolParseError(lineno, "shape needs three positive integers J M N");
    }
    pool.users = static_cast<std::size_t>(j);
    pool.channels = static_cast<std::size_t>(m);
    pool.length = static_cast<std::size_t>(n);
  }

  const std::size_t per_group = pool.users * pool.channels;
  std::vector<BinarySequence> current;
  std::vector<std::string> notes;
  std::size_t group_start = 0;
  auto flush = [&]() {
    if (current.empty()) return;
    if (current.size() != per_group) {
      throw PoolParseError(group_start, "group has " + std::to_string(current.size()) +
                                            " sequences, expected " + std::to_string(per_group));
    }
    pool.groups.emplace_back(pool.users, pool.channels, std::move(current));
    pool.annotations.push_back(std::move(notes));
    current.clear();
    notes.clear();
  };

  while (std::getline(is, raw)) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      if (!current.empty()) throw PoolParseError(lineno, "annotation inside a group");
      notes.push_back(trim(line.substr(1)));
      continue;
    }
    if (current.empty()) group_start = lineno;
    try {
      BinarySequence s = pool.mapping == SymbolMapping::Signs ? BinarySequence::from_signs(line)
                                                              : BinarySequence::from_bits(line);
      if (s.size() != pool.length) {
        throw PoolParseError(lineno, "sequence length " + std::to_string(s.size()) +
                                         ", expected " + std::to_string(pool.length));
      }
      current.push_back(std::move(s));
    } catch (const PoolParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw PoolParseError(lineno, e.what());
    }
    if (current.size() == per_group) flush();
  }
  flush();
  if (!notes.empty()) throw PoolParseError(lineno, "trailing annotation without a group");
  if (pool.groups.empty()) throw PoolParseError(lineno, "pool contains no sequences");
  return pool;
}

SequencePool read_pool_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return read_pool(in);
  } catch (const PoolParseError& e) {
    throw std::runtime_error(path + ":" + e.what());
  }
}

void write_pool_file(const std::string& path, const SequencePool& pool) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_pool(out, pool);
  if (!out) throw std::runtime_error("write failed: " + path);
}

SequencePool pool_of_sequences(const std::vector<BinarySequence>& seqs, SymbolMapping mapping) {
  if (seqs.empty()) throw std::invalid_argument("pool_of_sequences: empty list");
  SequencePool pool;
  pool.mapping = mapping;
  pool.length = seqs.front().size();
  for (const auto& s : seqs) pool.groups.emplace_back(1, 1, std::vector<BinarySequence>{s});
  pool.annotations.resize(pool.groups.size());
  return pool;
}

SequencePool pool_of_sets(const std::vector<SequenceSet>& sets, SymbolMapping mapping) {
  if (sets.empty()) throw std::invalid_argument("pool_of_sets: empty list");
  SequencePool pool;
  pool.mapping = mapping;
  pool.users = sets.front().users();
  pool.channels = sets.front().channels();
  pool.length = sets.front().length();
  pool.groups = sets;
  pool.annotations.resize(sets.size());
  return pool;
}

}  // namespace hpgan
