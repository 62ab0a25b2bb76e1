// hpgan: metrics, datagen, search, verify and sweep subcommands.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "hpgan/config.hpp"
#include "hpgan/datagen.hpp"
#include "hpgan/hopnet.hpp"
#include "hpgan/reference.hpp"
#include "hpgan/search.hpp"
#include "hpgan/seqio.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hpgan;

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed for " + p.string());
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

void write_text(const fs::path& p, const std::string& text) {
  // Write then rename so an interrupted run never leaves a torn file.
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

fs::path resolve_out_dir(const std::string& flag) {
  std::string dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv("HPGAN_OUT_DIR");
    dir = env && *env ? env : "hpgan-out";
  }
  fs::create_directories(dir);
  return dir;
}

struct Manifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  fs::path out_dir;
  std::string started = utc_now();
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  std::vector<std::string> artifacts;

  void write() const {
    json j;
    j["command"] = command;
    j["config"] = config_path;
    j["seed"] = seed;
    j["output_dir"] = out_dir.string();
    j["started_utc"] = started;
    j["finished_utc"] = utc_now();
    j["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json files = json::array();
    for (const auto& a : artifacts) {
      const fs::path p = out_dir / a;
      files.push_back({{"file", a}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
    }
    j["artifacts"] = files;
    write_text(out_dir / "manifest.json", j.dump(2) + "\n");
  }
};

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stod(item));
  if (out.empty()) throw std::invalid_argument("empty list '" + csv + "'");
  return out;
}

// Shortest text that reads back to the same double.
std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------- metrics

int cmd_metrics(const std::string& file, const std::string& problem, int oversampling,
                const std::string& csv_path) {
  const auto pool = read_pool_file(file);
  const auto kind = parse_problem_kind(problem);
  std::ostringstream csv;
  if (kind == ProblemKind::Moccs) {
    csv << "group,metric\n";
    for (std::size_t g = 0; g < pool.groups.size(); ++g) {
      const long m = moccs_metric(pool.groups[g]);
      std::printf("group %zu: metric %ld\n", g + 1, m);
      csv << g + 1 << ',' << m << '\n';
    }
  } else if (kind == ProblemKind::Obzcp) {
    if (pool.users * pool.channels != 2 || pool.length % 2 == 0) {
      throw std::invalid_argument("obzcp metrics need pairs (J*M = 2) of odd length");
    }
    csv << "group,front_zcz,tail_zcz,out_of_zone_max,pmepr_1,pmepr_2\n";
    for (std::size_t g = 0; g < pool.groups.size(); ++g) {
      const auto p = zcp_profile(pool.groups[g].sequences(), oversampling);
      std::printf("group %zu: front ZCZ %zu, tail ZCZ %zu, out-of-zone %ld, PMEPR %.6f %.6f\n",
                  g + 1, p.front_zcz, p.tail_zcz, p.out_of_zone_max, p.pmepr_per_sequence[0],
                  p.pmepr_per_sequence[1]);
      csv << g + 1 << ',' << p.front_zcz << ',' << p.tail_zcz << ',' << p.out_of_zone_max << ','
          << num(p.pmepr_per_sequence[0]) << ',' << num(p.pmepr_per_sequence[1]) << '\n';
    }
  } else {
    csv << "group,index,length,gamma_mf,gamma_mmf,pmepr\n";
    for (std::size_t g = 0; g < pool.groups.size(); ++g) {
      const auto& seqs = pool.groups[g].sequences();
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        const auto sol = mmf_sir(seqs[i]);
        const double mf = sol.gamma_mf.value_or(std::numeric_limits<double>::infinity());
        const double pm = pmepr(seqs[i], oversampling);
        std::printf("group %zu seq %zu: N %zu, gamma_MF %.6f, gamma_MMF %.6f, PMEPR %.6f\n",
                    g + 1, i + 1, seqs[i].size(), mf, sol.gamma_mmf, pm);
        csv << g + 1 << ',' << i + 1 << ',' << seqs[i].size() << ',' << num(mf) << ','
            << num(sol.gamma_mmf) << ',' << num(pm) << '\n';
      }
    }
  }
  if (!csv_path.empty()) write_text(csv_path, csv.str());
  return 0;
}

// ---------------------------------------------------------------- datagen

struct DatagenOptions {
  std::string problem = "moccs";
  std::size_t count = 200;
  std::uint64_t seed = 1;
  std::size_t length = 0;
  std::string mapping = "signs";
  std::size_t ga_generations = 500;
  double band_low = 10.0;
  double band_high = 21.0;
  std::string out;
};

int cmd_datagen(const DatagenOptions& o) {
  Manifest man;
  man.command = "datagen " + o.problem;
  man.seed = o.seed;
  man.out_dir = resolve_out_dir(o.out);
  Rng rng = RngStreams(o.seed).ga;
  const SymbolMapping mapping = o.mapping == "bits" ? SymbolMapping::Bits : SymbolMapping::Signs;
  if (o.mapping != "bits" && o.mapping != "signs") {
    throw std::invalid_argument("mapping must be signs or bits");
  }
  SequencePool pool;
  char note[160];
  if (o.problem == "moccs") {
    pool = pool_of_sets(moccs_train_set(o.count, rng), mapping);
    for (std::size_t g = 0; g < pool.groups.size(); ++g) {
      std::snprintf(note, sizeof note, "metric %ld", moccs_metric(pool.groups[g]));
      pool.annotations[g].push_back(note);
    }
  } else if (o.problem == "golay") {
    const std::size_t len = o.length ? o.length : 8;
    std::set<Flock> distinct;
    for (const auto& p : golay_pairs(len)) distinct.insert(canonical_pair(p));
    std::vector<Flock> all(distinct.begin(), distinct.end());
    if (o.count > all.size()) {
      throw std::invalid_argument("only " + std::to_string(all.size()) + " distinct pairs");
    }
    rng.shuffle(all);
    all.resize(o.count);
    std::vector<SequenceSet> sets;
    for (const auto& p : all) sets.emplace_back(1, 2, p);
    pool = pool_of_sets(sets, mapping);
  } else if (o.problem == "obzcp") {
    std::vector<SequenceSet> sets;
    for (const auto& p : obzcp_train_set()) sets.emplace_back(1, 2, p);
    pool = pool_of_sets(sets, mapping);
    for (std::size_t g = 0; g < pool.groups.size(); ++g) {
      const auto p = zcp_profile(pool.groups[g].sequences(), kObzcpTrainOversampling);
      std::snprintf(note, sizeof note, "front_zcz %zu tail_zcz %zu out_of_zone %ld pmepr %.6f %.6f",
                    p.front_zcz, p.tail_zcz, p.out_of_zone_max, p.pmepr_per_sequence[0],
                    p.pmepr_per_sequence[1]);
      pool.annotations[g].push_back(note);
    }
  } else if (o.problem == "radar") {
    GaConfig ga;
    ga.generations = o.ga_generations;
    ga.band_low = o.band_low;
    ga.band_high = o.band_high;
    ga.band_target = o.count;
    const auto res = ga_search(ga, o.length ? o.length : 59, rng);
    if (res.archive.size() < o.count) {
      throw std::runtime_error("GA archived only " + std::to_string(res.archive.size()) +
                               " in-band sequences");
    }
    std::vector<BinarySequence> seqs;
    for (std::size_t i = 0; i < o.count; ++i) seqs.push_back(res.archive[i].sequence);
    pool = pool_of_sequences(seqs, mapping);
    for (std::size_t g = 0; g < pool.groups.size(); ++g) {
      std::snprintf(note, sizeof note, "gamma_mmf %.6f", res.archive[g].fitness);
      pool.annotations[g].push_back(note);
    }
  } else {
    throw std::invalid_argument("unknown datagen problem '" + o.problem + "'");
  }
  std::ostringstream os;
  write_pool(os, pool);
  write_text(man.out_dir / "pool.txt", os.str());
  man.artifacts = {"pool.txt"};
  man.write();
  std::printf("wrote %zu groups to %s\n", pool.groups.size(),
              (man.out_dir / "pool.txt").string().c_str());
  return 0;
}

// ---------------------------------------------------------------- search

json report_json(const RunReport& r, const RunConfig& cfg) {
  json j;
  j["format"] = "hpgan-report 1";
  j["problem"] = {{"kind", to_string(r.problem.kind)},
                  {"users", r.problem.users},
                  {"channels", r.problem.channels},
                  {"length", r.problem.length}};
  j["seed"] = r.seed;
  j["iterations"] = r.iterations;
  json c = json::object();
  std::istringstream lines(config_text(cfg));
  for (std::string l; std::getline(lines, l);) {
    const auto eq = l.find(" = ");
    if (eq != std::string::npos) c[l.substr(0, eq)] = l.substr(eq + 3);
  }
  j["config"] = c;
  json found = json::array();
  std::size_t novel = 0;
  for (const auto& f : r.found) {
    const auto set = unflatten(f.flat, r.problem.users, r.problem.channels, r.problem.length);
    json seqs = json::array();
    for (const auto& s : set.sequences()) seqs.push_back(s.to_signs());
    found.push_back({{"sequences", seqs},
                     {"value", f.score.value},
                     {"tiebreak", f.score.tiebreak},
                     {"novel", f.novel},
                     {"iteration", f.iteration}});
    novel += f.novel ? 1 : 0;
  }
  j["found_count"] = r.found.size();
  j["novel_count"] = novel;
  j["found"] = found;
  json gens = json::array();
  for (const auto& g : r.generations) {
    gens.push_back({{"phase", g.phase_index},
                    {"threshold", g.threshold ? json(*g.threshold) : json(nullptr)},
                    {"stalled", g.stalled},
                    {"qualifying", g.qualifying},
                    {"pool_size", g.pool_size},
                    {"min", g.min_value},
                    {"mean", g.mean_value},
                    {"max", g.max_value}});
  }
  j["generations"] = gens;
  bool monotone = true;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (const auto& m : r.trace.metrics) {
    if (!std::isnan(prev) && !std::isnan(m.best_so_far) &&
        value_better(r.problem.kind, prev, m.best_so_far)) {
      monotone = false;
    }
    if (!std::isnan(m.best_so_far)) prev = m.best_so_far;
  }
  j["best_so_far"] = std::isnan(prev) ? json(nullptr) : json(prev);
  j["best_so_far_monotone"] = monotone;
  j["stable_flags"] = r.trace.stable_flags;
  if (!r.trace.losses.empty()) {
    j["final_losses"] = {{"d_loss", r.trace.losses.back().d_loss},
                         {"g_loss", r.trace.losses.back().g_loss}};
  }
  return j;
}

int cmd_search(const std::string& config_path, std::optional<std::uint64_t> seed,
               const std::string& out, bool resume, std::optional<std::uint64_t> stop_after) {
  RunConfig cfg = load_config(config_path);
  if (seed) {
    cfg.search.seed = *seed;
    cfg.search.validate();
  }
  Manifest man;
  man.command = "search";
  man.config_path = config_path;
  man.seed = cfg.search.seed;
  man.out_dir = resolve_out_dir(out);
  const fs::path ckpt = man.out_dir / "checkpoint.txt";

  std::optional<SearchRun> run;
  if (resume) {
    std::ifstream in(ckpt, std::ios::binary);
    if (!in) throw std::runtime_error("resume: no checkpoint at " + ckpt.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    run.emplace(SearchRun::resume(cfg.search, ss.str()));
    std::printf("resumed at iteration %llu\n", static_cast<unsigned long long>(run->iteration()));
  } else {
    const auto pool = build_initial_pool(cfg);
    run.emplace(cfg.search, pool);
    std::vector<SequenceSet> sets;
    for (const auto& s : pool) {
      sets.push_back(unflatten(s, cfg.search.problem.users, cfg.search.problem.channels,
                               cfg.search.problem.length));
    }
    std::ostringstream os;
    write_pool(os, pool_of_sets(sets));
    write_text(man.out_dir / "initial_pool.txt", os.str());
  }
  write_text(man.out_dir / "config.txt", config_text(cfg));

  const auto status = run->run([&](const std::string& text) { write_text(ckpt, text); }, stop_after);
  if (status == SearchRun::Status::Stopped) {
    std::printf("stopped at iteration %llu; checkpoint %s\n",
                static_cast<unsigned long long>(run->iteration()), ckpt.string().c_str());
    return 0;
  }

  const auto report = run->report();
  write_text(man.out_dir / "report.json", report_json(report, cfg).dump(2) + "\n");
  {
    std::ostringstream os;
    os << "iteration,d_loss,g_loss\n";
    for (const auto& l : report.trace.losses) {
      os << l.iteration << ',' << num(l.d_loss) << ',' << num(l.g_loss) << '\n';
    }
    write_text(man.out_dir / "losses.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "iteration,mean,extremal,best_so_far\n";
    for (const auto& m : report.trace.metrics) {
      os << m.iteration << ',' << num(m.mean_metric) << ',' << num(m.extremal_metric) << ','
         << num(m.best_so_far) << '\n';
    }
    write_text(man.out_dir / "metrics.csv", os.str());
  }
  {
    SequencePool found;
    const auto& p = report.problem;
    found.users = p.users;
    found.channels = p.channels;
    found.length = p.length;
    for (const auto& f : report.found) {
      found.groups.push_back(unflatten(f.flat, p.users, p.channels, p.length));
      found.annotations.push_back({"value " + num(f.score.value) + " tiebreak " + num(f.score.tiebreak) +
                                   " novel " + (f.novel ? "1" : "0") + " iteration " +
                                   std::to_string(f.iteration)});
    }
    std::ostringstream os;
    write_pool(os, found);
    write_text(man.out_dir / "found.txt", os.str());
  }
  man.artifacts = {"config.txt", "report.json", "losses.csv", "metrics.csv", "found.txt",
                   "checkpoint.txt"};
  if (fs::exists(man.out_dir / "initial_pool.txt")) man.artifacts.push_back("initial_pool.txt");
  man.write();

  std::size_t novel = 0;
  for (const auto& f : report.found) novel += f.novel ? 1 : 0;
  std::printf("%llu iterations, %zu finds (%zu novel), output in %s\n",
              static_cast<unsigned long long>(report.iterations), report.found.size(), novel,
              man.out_dir.string().c_str());
  return 0;
}

// ---------------------------------------------------------------- verify

int cmd_verify(int oversampling) {
  const auto rows = reference::verify_all(oversampling);
  std::size_t failed = 0;
  for (const auto& r : rows) {
    std::printf("%s  %-55s expected %-28s actual %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.expected.c_str(), r.actual.c_str());
    failed += r.pass ? 0 : 1;
  }
  std::printf("%zu/%zu passed\n", rows.size() - failed, rows.size());
  return failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::string p_values = "1,2,4,8";
  std::string b_values = "0,0.2,0.4,0.6,0.8";
  std::size_t trials = 20;
  std::size_t restarts = 32;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_sweep(const SweepOptions& o) {
  Manifest man;
  man.command = "sweep";
  man.seed = o.seed;
  man.out_dir = resolve_out_dir(o.out);
  RngStreams rngs(o.seed);
  std::vector<BinarySequence> pool;
  for (const auto& s : moccs_train_set(200, rngs.ga)) pool.push_back(flatten(s));
  std::vector<std::size_t> ps;
  for (double v : parse_doubles(o.p_values)) ps.push_back(static_cast<std::size_t>(v));
  const auto bs = parse_doubles(o.b_values);
  DecoderSettings settings;
  settings.restarts = o.restarts;
  const auto table = decoding_accuracy_sweep(pool, ps, bs, o.trials, settings, rngs.decode);
  std::ostringstream os;
  os << "p,b,accuracy\n";
  for (const auto& c : table) {
    os << c.patterns << ',' << num(c.noise) << ',' << num(c.accuracy) << '\n';
    std::printf("P %zu  b %.3f  accuracy %.4f\n", c.patterns, c.noise, c.accuracy);
  }
  write_text(man.out_dir / "sweep.csv", os.str());
  man.artifacts = {"sweep.csv"};
  man.write();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HpGAN sequence search"};
  app.require_subcommand(1);

  std::string metrics_file, metrics_problem = "radar", metrics_csv;
  int oversampling = kDefaultOversampling;
  auto* metrics = app.add_subcommand("metrics", "Evaluate the sequences in a pool file");
  metrics->add_option("file", metrics_file, "Pool file")->required();
  metrics->add_option("--problem", metrics_problem, "moccs, obzcp or radar")
      ->check(CLI::IsMember({"moccs", "obzcp", "radar"}));
  metrics->add_option("--oversampling", oversampling, "PMEPR grid oversampling (>= 4)");
  metrics->add_option("--csv", metrics_csv, "Also write the table as CSV");

  DatagenOptions dg;
  auto* datagen = app.add_subcommand("datagen", "Write a training pool");
  datagen->add_option("--problem", dg.problem, "moccs, golay, obzcp or radar")
      ->check(CLI::IsMember({"moccs", "golay", "obzcp", "radar"}));
  datagen->add_option("--count", dg.count, "Number of groups");
  datagen->add_option("--seed", dg.seed, "Run seed");
  datagen->add_option("--length", dg.length, "Sequence length (golay, radar)");
  datagen->add_option("--mapping", dg.mapping, "signs or bits");
  datagen->add_option("--ga-generations", dg.ga_generations, "GA generations (radar)");
  datagen->add_option("--band-low", dg.band_low, "Lower fitness band edge (radar)");
  datagen->add_option("--band-high", dg.band_high, "Upper fitness band edge (radar)");
  datagen->add_option("--out", dg.out, "Output directory");

  std::string config_path, search_out;
  std::optional<std::uint64_t> search_seed, stop_after;
  bool resume = false;
  auto* search = app.add_subcommand("search", "Run a search from a config file");
  search->add_option("--config", config_path, "Config file")->required();
  search->add_option("--seed", search_seed, "Override the config seed");
  search->add_option("--out", search_out, "Output directory");
  search->add_flag("--resume", resume, "Continue from <out>/checkpoint.txt");
  search->add_option("--stop-after", stop_after, "Checkpoint and stop at this iteration")
      ->group("");

  int verify_os = kDefaultOversampling;
  auto* verify = app.add_subcommand("verify", "Check the reference values");
  verify->add_option("--oversampling", verify_os, "PMEPR grid oversampling");

  SweepOptions sw;
  auto* sweep = app.add_subcommand("sweep", "Decoding accuracy over (P, b)");
  sweep->add_option("--p-values", sw.p_values, "Comma-separated pattern counts");
  sweep->add_option("--b-values", sw.b_values, "Comma-separated noise magnitudes");
  sweep->add_option("--trials", sw.trials, "Round trips per cell");
  sweep->add_option("--restarts", sw.restarts, "Decoder restarts");
  sweep->add_option("--seed", sw.seed, "Run seed");
  sweep->add_option("--out", sw.out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*metrics) return cmd_metrics(metrics_file, metrics_problem, oversampling, metrics_csv);
    if (*datagen) return cmd_datagen(dg);
    if (*search) return cmd_search(config_path, search_seed, search_out, resume, stop_after);
    if (*verify) return cmd_verify(verify_os);
    if (*sweep) return cmd_sweep(sw);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
