#include "hpgan/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hpgan/seqio.hpp"

namespace hpgan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t to_size(const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("expected a nonnegative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(std::stoull(v));
}

double to_double(const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw std::invalid_argument("expected a number, got '" + v + "'");
  return d;
}

bool to_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::vector<std::size_t> to_list(const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(to_size(trim(item)));
  if (out.empty()) throw std::invalid_argument("expected a comma-separated list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem", [](RunConfig& c, const std::string& v) { c.search.problem.kind = parse_problem_kind(v); }},
      {"users", [](RunConfig& c, const std::string& v) { c.search.problem.users = to_size(v); }},
      {"channels", [](RunConfig& c, const std::string& v) { c.search.problem.channels = to_size(v); }},
      {"length", [](RunConfig& c, const std::string& v) { c.search.problem.length = to_size(v); }},
      {"p_max", [](RunConfig& c, const std::string& v) { c.search.p_max = to_size(v); }},
      {"b_max", [](RunConfig& c, const std::string& v) { c.search.b_max = to_double(v); }},
      {"dataset_size", [](RunConfig& c, const std::string& v) { c.search.dataset_size = to_size(v); }},
      {"batch_size", [](RunConfig& c, const std::string& v) { c.search.batch_size = to_size(v); }},
      {"iterations_total", [](RunConfig& c, const std::string& v) { c.search.iterations_total = to_size(v); }},
      {"phase_length", [](RunConfig& c, const std::string& v) { c.search.phase_length = to_size(v); }},
      {"eval_period", [](RunConfig& c, const std::string& v) { c.search.eval_period = to_size(v); }},
      {"eval_count", [](RunConfig& c, const std::string& v) { c.search.eval_count = to_size(v); }},
      {"candidates_per_phase", [](RunConfig& c, const std::string& v) { c.search.candidates_per_phase = to_size(v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.search.seed = to_size(v); }},
      {"noise_dim", [](RunConfig& c, const std::string& v) { c.search.noise_dim = to_size(v); }},
      {"gen_hidden", [](RunConfig& c, const std::string& v) { c.search.gen_hidden = to_list(v); }},
      {"disc_hidden", [](RunConfig& c, const std::string& v) { c.search.disc_hidden = to_list(v); }},
      {"learning_rate", [](RunConfig& c, const std::string& v) { c.search.adam.learning_rate = to_double(v); }},
      {"beta1", [](RunConfig& c, const std::string& v) { c.search.adam.beta1 = to_double(v); }},
      {"beta2", [](RunConfig& c, const std::string& v) { c.search.adam.beta2 = to_double(v); }},
      {"adam_epsilon", [](RunConfig& c, const std::string& v) { c.search.adam.epsilon = to_double(v); }},
      {"use_encoder", [](RunConfig& c, const std::string& v) { c.search.use_encoder = to_bool(v); }},
      {"sample_scale",
       [](RunConfig& c, const std::string& v) {
         if (v == "auto") {
           c.search.sample_scale.reset();
         } else {
           c.search.sample_scale = to_double(v);
         }
       }},
      {"decoder_restarts", [](RunConfig& c, const std::string& v) { c.search.decoder.restarts = to_size(v); }},
      {"decoder_mode",
       [](RunConfig& c, const std::string& v) {
         if (v == "sync") {
           c.search.decoder.mode = Synchronous{};
         } else if (v == "async") {
           if (!std::holds_alternative<GeneralizedAsync>(c.search.decoder.mode)) {
             c.search.decoder.mode = GeneralizedAsync{};
           }
         } else {
           throw std::invalid_argument("expected sync or async, got '" + v + "'");
         }
       }},
      {"decoder_k",
       [](RunConfig& c, const std::string& v) {
         const auto k = to_size(v);
         if (auto* g = std::get_if<GeneralizedAsync>(&c.search.decoder.mode)) {
           g->k = k;
         } else if (k != 0) {
           throw std::invalid_argument("decoder_k needs decoder_mode = async");
         }
       }},
      {"decoder_max_steps", [](RunConfig& c, const std::string& v) { c.search.decoder.max_steps = to_size(v); }},
      {"eval_restarts", [](RunConfig& c, const std::string& v) { c.search.eval_restarts = to_size(v); }},
      {"update_pool", [](RunConfig& c, const std::string& v) { c.search.update_pool = to_bool(v); }},
      {"radar_base", [](RunConfig& c, const std::string& v) { c.search.radar_base = to_double(v); }},
      {"radar_step", [](RunConfig& c, const std::string& v) { c.search.radar_step = to_double(v); }},
      {"quorum", [](RunConfig& c, const std::string& v) { c.search.quorum = to_size(v); }},
      {"pool_cap", [](RunConfig& c, const std::string& v) { c.search.pool_cap = to_size(v); }},
      {"find_threshold",
       [](RunConfig& c, const std::string& v) {
         if (v == "none") {
           c.search.find_threshold.reset();
         } else {
           c.search.find_threshold = to_double(v);
         }
       }},
      {"stability_window", [](RunConfig& c, const std::string& v) { c.search.stability_window = to_size(v); }},
      {"stability_tolerance", [](RunConfig& c, const std::string& v) { c.search.stability_tolerance = to_double(v); }},
      {"checkpoint_every", [](RunConfig& c, const std::string& v) { c.search.checkpoint_every = to_size(v); }},
      {"pool",
       [](RunConfig& c, const std::string& v) {
         if (v.rfind("file:", 0) == 0) {
           c.pool.kind = "file";
           c.pool.path = v.substr(5);
           if (c.pool.path.empty()) throw std::invalid_argument("file: needs a path");
         } else if (v == "moccs" || v == "golay" || v == "obzcp" || v == "ga") {
           c.pool.kind = v;
         } else {
           throw std::invalid_argument("unknown pool source '" + v + "'");
         }
       }},
      {"pool_size", [](RunConfig& c, const std::string& v) { c.pool.pool_size = to_size(v); }},
      {"ga_population", [](RunConfig& c, const std::string& v) { c.pool.ga.population_size = to_size(v); }},
      {"ga_generations", [](RunConfig& c, const std::string& v) { c.pool.ga.generations = to_size(v); }},
      {"ga_crossover", [](RunConfig& c, const std::string& v) { c.pool.ga.crossover_rate = to_double(v); }},
      {"ga_mutation",
       [](RunConfig& c, const std::string& v) {
         if (v == "auto") {
           c.pool.ga.mutation_rate.reset();
         } else {
           c.pool.ga.mutation_rate = to_double(v);
         }
       }},
      {"ga_tournament", [](RunConfig& c, const std::string& v) { c.pool.ga.tournament_size = to_size(v); }},
      {"ga_band_low", [](RunConfig& c, const std::string& v) { c.pool.ga.band_low = to_double(v); }},
      {"ga_band_high", [](RunConfig& c, const std::string& v) { c.pool.ga.band_high = to_double(v); }},
      {"ga_target", [](RunConfig& c, const std::string& v) { c.pool.ga.band_target = to_size(v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  c.pool.ga.band_target = 250;
  std::istringstream in(text);
  std::set<std::string> seen;
  std::string raw;
  std::size_t lineno = 0;
  // decoder_mode must be applied before decoder_k regardless of file order.
  std::string pending_k;
  std::size_t pending_k_line = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    }
    if (key == "decoder_k") {
      pending_k = value;
      pending_k_line = lineno;
      continue;
    }
    try {
      it->second(c, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
  if (!pending_k.empty()) {
    try {
      setters().at("decoder_k")(c, pending_k);
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(pending_k_line) + " (decoder_k): " + e.what());
    }
  }
  // Radar pools move by default; the other problems train on a fixed pool.
  if (!seen.count("update_pool")) c.search.update_pool = c.search.problem.kind == ProblemKind::Radar;
  c.pool.ga.fitness = c.search.problem.kind == ProblemKind::Moccs ? GaFitness::MoccsMetric : GaFitness::MmfSir;
  c.pool.ga.users = c.search.problem.users;
  c.pool.ga.channels = c.search.problem.channels;
  c.search.validate();
  c.pool.ga.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string config_text(const RunConfig& c) {
  std::ostringstream os;
  os << c.search.canonical_text();
  os << "pool = " << (c.pool.kind == "file" ? "file:" + c.pool.path : c.pool.kind) << '\n'
     << "pool_size = " << c.pool.pool_size << '\n'
     << "ga_population = " << c.pool.ga.population_size << '\n'
     << "ga_generations = " << c.pool.ga.generations << '\n'
     << "ga_crossover = " << fmt(c.pool.ga.crossover_rate) << '\n'
     << "ga_mutation = " << (c.pool.ga.mutation_rate ? fmt(*c.pool.ga.mutation_rate) : "auto") << '\n'
     << "ga_tournament = " << c.pool.ga.tournament_size << '\n'
     << "ga_band_low = " << fmt(c.pool.ga.band_low) << '\n'
     << "ga_band_high = " << fmt(c.pool.ga.band_high) << '\n'
     << "ga_target = " << c.pool.ga.band_target << '\n';
  return os.str();
}

std::vector<BinarySequence> build_initial_pool(const RunConfig& config) {
  const auto& p = config.search.problem;
  Rng rng = RngStreams(config.search.seed).ga;
  std::vector<BinarySequence> out;
  const auto& kind = config.pool.kind;
  if (kind == "moccs") {
    if (p.kind != ProblemKind::Moccs || p.users != 2 || p.channels != 2 || p.length != 8) {
      throw std::invalid_argument("pool = moccs needs problem = moccs with users = channels = 2, length = 8");
    }
    for (const auto& s : moccs_train_set(config.pool.pool_size, rng)) out.push_back(flatten(s));
  } else if (kind == "golay") {
    if (p.users != 1 || p.channels != 2) throw std::invalid_argument("pool = golay needs users = 1, channels = 2");
    std::set<BinarySequence> distinct;
    for (const auto& pair : golay_pairs(p.length)) {
      distinct.insert(flatten(SequenceSet(1, 2, pair)).canonical());
    }
    std::vector<BinarySequence> all(distinct.begin(), distinct.end());
    if (config.pool.pool_size > all.size()) {
      throw std::invalid_argument("pool_size " + std::to_string(config.pool.pool_size) + " exceeds the " +
                                  std::to_string(all.size()) + " distinct Golay pairs");
    }
    rng.shuffle(all);
    all.resize(config.pool.pool_size);
    out = std::move(all);
  } else if (kind == "obzcp") {
    if (p.kind != ProblemKind::Obzcp || p.length != 15) {
      throw std::invalid_argument("pool = obzcp needs problem = obzcp with length = 15");
    }
    for (const auto& pair : obzcp_train_set()) out.push_back(flatten(SequenceSet(1, 2, pair)));
  } else if (kind == "ga") {
    const auto res = ga_search(config.pool.ga, p.flat_length(), rng);
    for (const auto& m : res.archive) out.push_back(m.sequence);
    if (out.empty()) throw std::runtime_error("pool = ga: no member reached the fitness band");
  } else {
    const auto pool = read_pool_file(config.pool.path);
    if (pool.users != p.users || pool.channels != p.channels || pool.length != p.length) {
      throw std::invalid_argument("pool file shape does not match the problem");
    }
    for (const auto& g : pool.groups) out.push_back(flatten(g));
  }
  return out;
}

}  // namespace hpgan
