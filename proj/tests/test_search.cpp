#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "hpgan/config.hpp"
#include "hpgan/datagen.hpp"
#include "hpgan/search.hpp"
#include "hpgan/seqio.hpp"

using namespace hpgan;

namespace {

SearchConfig tiny_radar() {
  SearchConfig c;
  c.problem = {ProblemKind::Radar, 1, 1, 7};
  c.p_max = 2;
  c.dataset_size = 20;
  c.batch_size = 10;
  c.iterations_total = 40;
  c.phase_length = 20;
  c.eval_period = 10;
  c.eval_count = 5;
  c.candidates_per_phase = 5;
  c.noise_dim = 4;
  c.gen_hidden = {8};
  c.disc_hidden = {8};
  c.decoder.restarts = 4;
  c.update_pool = true;
  c.radar_base = 2.0;
  c.radar_step = 0.5;
  c.quorum = 1;
  c.pool_cap = 10;
  return c;
}

std::vector<BinarySequence> radar_pool7() {
  return {BinarySequence::from_signs("+++--+-"), BinarySequence::from_signs("++-+---"),
          BinarySequence::from_signs("+-+++--")};
}

Candidate cand(const Problem& p, const char* signs) {
  const auto s = BinarySequence::from_signs(signs).canonical();
  return {s, score_flat(p, s)};
}

Candidate radar_cand(std::uint64_t bits, double value) {
  std::vector<int> v(7, 1);
  for (int i = 1; i < 7; ++i) v[i] = (bits >> (i - 1)) & 1 ? -1 : 1;
  return {BinarySequence(v), {value, 0.0}};
}

}  // namespace

TEST_CASE("problem validation and scoring") {
  CHECK_THROWS(Problem{ProblemKind::Obzcp, 1, 2, 8}.validate());
  CHECK_THROWS(Problem{ProblemKind::Radar, 2, 1, 8}.validate());
  CHECK_NOTHROW(Problem{ProblemKind::Obzcp, 1, 2, 7}.validate());
  CHECK(parse_problem_kind("radar") == ProblemKind::Radar);
  CHECK_THROWS(parse_problem_kind("sonar"));

  const Problem radar{ProblemKind::Radar, 1, 1, 13};
  CHECK(score_flat(radar, barker13()).value == doctest::Approx(mmf_gamma(barker13())));
  CHECK_THROWS(score_flat(radar, BinarySequence{1, 1}));

  const Problem mo{ProblemKind::Moccs, 1, 2, 4};
  const auto g = golay_pairs(4).front();
  CHECK(score_flat(mo, flatten(SequenceSet(1, 2, g))).value == 0.0);

  CHECK(value_better(ProblemKind::Radar, 2.0, 1.0));
  CHECK(value_better(ProblemKind::Moccs, 1.0, 2.0));
  CHECK(score_better(ProblemKind::Obzcp, {0.0, 1.0}, {0.0, 2.0}));
  CHECK(score_better(ProblemKind::Radar, {3.0, 5.0}, {2.0, 0.0}));
}

TEST_CASE("config sizes") {
  SearchConfig c;
  c.problem = {ProblemKind::Moccs, 2, 2, 8};
  CHECK(c.sample_width() == 1024);
  CHECK(c.minibatches_per_epoch() == 5);
  CHECK(c.generator_arch().widths == std::vector<std::size_t>{100, 1024, 1024});
  CHECK(c.discriminator_arch().widths == std::vector<std::size_t>{1024, 1024, 1});
  c.use_encoder = false;
  CHECK(c.sample_width() == 32);
  CHECK(c.effective_find_threshold() == 0.0);
  c.dataset_size = 150;
  CHECK_THROWS(c.validate());
}

TEST_CASE("radar pool update uses a rising threshold and a quorum") {
  auto c = tiny_radar();
  c.radar_base = 10;
  c.radar_step = 2;
  c.quorum = 2;
  const std::vector<Candidate> pool{radar_cand(1, 1.0)};
  std::vector<Candidate> cands{radar_cand(2, 11.0), radar_cand(3, 13.0), radar_cand(4, 14.0),
                               radar_cand(4, 14.0), radar_cand(5, 20.0)};
  const auto u1 = update_training_set(c, pool, cands, 1);
  CHECK(*u1.threshold == 12.0);
  CHECK_FALSE(u1.stalled);
  CHECK(u1.qualifying == 3);
  REQUIRE(u1.pool.size() == 3);
  CHECK(u1.pool.front().score.value == 20.0);
  const auto u2 = update_training_set(c, pool, cands, 4);
  CHECK(*u2.threshold == 18.0);
  CHECK(u2.stalled);
  CHECK(u2.qualifying == 1);
  CHECK(u2.pool.size() == 1);
  c.pool_cap = 2;
  CHECK(update_training_set(c, pool, cands, 0).pool.size() == 2);
  CHECK(update_training_set(c, pool, {}, 0).stalled);
}

TEST_CASE("moccs and obzcp pool updates keep the best") {
  SearchConfig c;
  c.problem = {ProblemKind::Moccs, 1, 2, 4};
  c.dataset_size = 3;
  c.batch_size = 1;
  c.quorum = 1;
  std::vector<Candidate> cands;
  for (const char* s : {"+++-++-+", "++++++++", "+-+-+-+-", "++-+++++", "++++----"})
    cands.push_back(cand(c.problem, s));
  const auto u = update_training_set(c, {}, cands, 1);
  REQUIRE(u.pool.size() == 3);
  CHECK_FALSE(u.threshold);
  CHECK(u.pool.front().score.value == 0.0);
  CHECK(std::is_sorted(u.pool.begin(), u.pool.end(), [](const Candidate& a, const Candidate& b) {
    return a.score.value < b.score.value;
  }));

  SearchConfig o;
  o.problem = {ProblemKind::Obzcp, 1, 2, 5};
  o.pool_cap = 2;
  o.quorum = 1;
  std::vector<Candidate> oc;
  for (const char* s : {"+++-++-+--", "++++++++++", "+-+-+-+-+-", "++-++++-++"})
    oc.push_back(cand(o.problem, s));
  const auto uo = update_training_set(o, {}, oc, 1);
  REQUIRE(uo.pool.size() == 2);
  CHECK_FALSE(score_better(ProblemKind::Obzcp, uo.pool[1].score, uo.pool[0].score));
  const auto sum = summarize_pool(u.pool);
  CHECK(sum.pool_size == 3);
  CHECK(sum.min_value <= sum.mean_value);
  CHECK(sum.mean_value <= sum.max_value);
}

TEST_CASE("brute force oracle") {
  const auto ob = brute_force_oracle({ProblemKind::Obzcp, 1, 2, 7});
  CHECK(ob.states == (1u << 13));
  CHECK(ob.best.value == 0.0);
  CHECK(ob.best.tiebreak == 2.0);
  CHECK_FALSE(ob.optima.empty());
  const auto ra = brute_force_oracle({ProblemKind::Radar, 1, 1, 13});
  CHECK(ra.best.value == doctest::Approx(37.0).epsilon(1e-3));
  CHECK(std::binary_search(ra.optima.begin(), ra.optima.end(), barker13().canonical()));
  const auto mo = brute_force_oracle({ProblemKind::Moccs, 1, 2, 4});
  CHECK(mo.best.value == 0.0);
  CHECK(mo.optima.size() == 16);  // 32 ordered Golay pairs, first symbol fixed
  CHECK_THROWS(brute_force_oracle({ProblemKind::Radar, 1, 1, 26}));
}

TEST_CASE("search with stub generation and decoding") {
  auto c = tiny_radar();
  c.find_threshold = 0.0;
  SearchRun run(c, radar_pool7());
  const auto barker7 = BinarySequence::from_signs("+++--+-");
  std::size_t generated = 0;
  run.set_generate_hook([&](std::size_t count, Rng&) {
    generated += count;
    return Eigen::MatrixXd::Zero(49, static_cast<Eigen::Index>(count));
  });
  run.set_decode_hook([&](const Eigen::VectorXd&, Rng&) {
    return std::vector<BinarySequence>{barker7, BinarySequence::from_signs("+------")};
  });
  CHECK(run.run() == SearchRun::Status::Completed);
  const auto rep = run.report();
  CHECK(rep.iterations == 40);
  CHECK(generated == 4 * 5 + 2 * 5);
  REQUIRE(rep.found.size() == 2);
  CHECK(rep.found[0].flat == barker7);
  CHECK_FALSE(rep.found[0].novel);
  CHECK(rep.found[1].novel);
  CHECK(rep.trace.losses.size() == 40);
  CHECK(rep.trace.metrics.size() == 4);
  CHECK(rep.generations.size() == 3);
  for (const auto& m : rep.trace.metrics) CHECK(m.best_so_far == doctest::Approx(mmf_gamma(barker7)));
}

TEST_CASE("zero iterations and bad pools") {
  auto c = tiny_radar();
  c.iterations_total = 0;
  const auto rep = hpgan_search(c, radar_pool7());
  CHECK(rep.iterations == 0);
  CHECK(rep.found.empty());
  CHECK(rep.trace.losses.empty());
  CHECK_THROWS(hpgan_search(tiny_radar(), {}));
  CHECK_THROWS(hpgan_search(tiny_radar(), {BinarySequence{1, 1, 1}}));
  auto big = tiny_radar();
  big.p_max = 4;
  CHECK_THROWS(hpgan_search(big, radar_pool7()));
}

TEST_CASE("runs are reproducible and resumable") {
  const auto c = tiny_radar();
  auto run_text = [&] {
    SearchRun run(c, radar_pool7());
    run.run();
    return run.checkpoint_text();
  };
  const auto full = run_text();
  CHECK(full == run_text());

  SearchRun first(c, radar_pool7());
  std::string saved;
  CHECK(first.run([&](const std::string& t) { saved = t; }, 10) == SearchRun::Status::Stopped);
  CHECK(first.iteration() == 10);
  auto resumed = SearchRun::resume(c, saved);
  CHECK(resumed.checkpoint_text() == saved);
  CHECK(resumed.run() == SearchRun::Status::Completed);
  CHECK(resumed.checkpoint_text() == full);

  // Stopping at a phase boundary works the same way.
  SearchRun second(c, radar_pool7());
  second.run([&](const std::string& t) { saved = t; }, 20);
  auto again = SearchRun::resume(c, saved);
  again.run();
  CHECK(again.checkpoint_text() == full);

  auto other = c;
  other.seed = 2;
  CHECK_THROWS(SearchRun::resume(other, saved));
  CHECK_THROWS(SearchRun::resume(c, saved.substr(0, saved.size() / 2)));
}

TEST_CASE("periodic checkpoints land on epoch boundaries") {
  auto c = tiny_radar();
  c.checkpoint_every = 15;
  SearchRun run(c, radar_pool7());
  std::vector<std::string> seen;
  run.run([&](const std::string& t) { seen.push_back(t); });
  // iterations 20 and 30 (first boundaries past 15 and 30), plus the final one
  CHECK(seen.size() == 3);
}

TEST_CASE("config parsing") {
  const auto rc = parse_config(
      "# radar\nproblem = radar\nlength = 31\ngen_hidden = 64, 32\ndecoder_mode = sync\n"
      "pool = ga\nfind_threshold = none\n");
  CHECK(rc.search.problem.kind == ProblemKind::Radar);
  CHECK(rc.search.problem.length == 31);
  CHECK(rc.search.gen_hidden == std::vector<std::size_t>{64, 32});
  CHECK(std::holds_alternative<Synchronous>(rc.search.decoder.mode));
  CHECK(rc.search.update_pool);
  CHECK(rc.pool.kind == "ga");
  CHECK(rc.pool.ga.fitness == GaFitness::MmfSir);
  CHECK(parse_config(config_text(rc)).search.canonical_text() == rc.search.canonical_text());
  CHECK(config_text(parse_config(config_text(rc))) == config_text(rc));

  auto fails_with = [](const std::string& text, const std::string& needle) {
    try {
      parse_config(text);
    } catch (const std::exception& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_with("problem = moccs\nbogus = 1\n", "line 2"));
  CHECK(fails_with("seed = 1\nseed = 2\n", "repeated key"));
  CHECK(fails_with("seed = -1\n", "line 1"));
  CHECK(fails_with("use_encoder = maybe\n", "true or false"));
  CHECK(fails_with("just words\n", "key = value"));
  CHECK(fails_with("decoder_mode = sync\ndecoder_k = 3\n", "decoder_k"));
  CHECK(fails_with("pool = magic\n", "unknown pool source"));
  CHECK(fails_with("dataset_size = 150\n", "multiple of batch_size"));
}

TEST_CASE("initial pools from config") {
  auto rc = parse_config("problem = moccs\nusers = 1\nchannels = 2\nlength = 8\npool = golay\npool_size = 20\n");
  const auto p1 = build_initial_pool(rc);
  CHECK(p1.size() == 20);
  CHECK(p1 == build_initial_pool(rc));
  for (const auto& s : p1) CHECK(score_flat(rc.search.problem, s).value == 0.0);
  rc.pool.kind = "moccs";
  CHECK_THROWS(build_initial_pool(rc));
  auto ob = parse_config("problem = obzcp\nusers = 1\nchannels = 2\nlength = 15\npool = obzcp\n");
  CHECK(build_initial_pool(ob).size() == 128);
}

TEST_CASE("pool files round trip") {
  Rng rng(1);
  SequencePool pool = pool_of_sets(moccs_train_set(5, rng), SymbolMapping::Bits);
  pool.annotations[1] = {"note one", "note two"};
  std::ostringstream os;
  write_pool(os, pool);
  std::istringstream is(os.str());
  const auto back = read_pool(is);
  CHECK(back.groups == pool.groups);
  CHECK(back.annotations == pool.annotations);
  CHECK(back.mapping == SymbolMapping::Bits);
  CHECK(back.users == 2);
  CHECK(back.length == 8);

  const auto seqs = pool_of_sequences({barker13(), barker13().negated()});
  std::ostringstream os2;
  write_pool(os2, seqs);
  std::istringstream is2(os2.str());
  CHECK(read_pool(is2).groups == seqs.groups);
}

TEST_CASE("pool parse errors carry line numbers") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream is(text);
    try {
      read_pool(is);
    } catch (const PoolParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("") == 1);
  CHECK(line_of("hpgan-pool 2\n") == 1);
  CHECK(line_of("hpgan-pool 1\nmapping hex\n") == 2);
  CHECK(line_of("hpgan-pool 1\nmapping signs\nshape 1 1 0\n") == 3);
  CHECK(line_of("hpgan-pool 1\nmapping signs\nshape 1 1 3\n++-\n+-\n") == 5);
  CHECK(line_of("hpgan-pool 1\nmapping signs\nshape 1 2 3\n++-\n\n") == 4);
  CHECK(line_of("hpgan-pool 1\nmapping signs\nshape 1 1 3\n++x\n") == 4);
  CHECK(line_of("hpgan-pool 1\nmapping signs\nshape 1 2 3\n++-\n# late\n+--\n") == 5);
  CHECK(line_of("hpgan-pool 1\nmapping signs\nshape 1 1 3\n") != 0);
}
