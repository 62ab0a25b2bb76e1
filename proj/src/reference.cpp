#include "hpgan/reference.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "hpgan/datagen.hpp"
#include "hpgan/hopnet.hpp"
#include "hpgan/rng.hpp"
#include "hpgan/search.hpp"

namespace hpgan::reference {

namespace {

std::string num(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string join(const std::set<BinarySequence>& s) {
  std::string out = "{";
  for (const auto& x : s) out += (out.size() > 1 ? "," : "") + x.to_signs();
  return out + "}";
}

}  // namespace

BinarySequence radar_hpgan59() {
  return BinarySequence::from_bits(
      "0101010101010101101010100101110011000011"
      "1111000000000000000");
}

Flock obzcp_type1() {
  return {{-1, -1, 1, -1, -1, 1, -1, -1, -1, 1, -1, 1, -1, 1, 1},
          {-1, 1, 1, 1, 1, -1, -1, -1, 1, 1, -1, 1, 1, 1, 1}};
}

Flock obzcp_type2() {
  return {{-1, 1, -1, 1, -1, -1, -1, -1, 1, 1, -1, 1, 1, -1, -1},
          {1, 1, 1, 1, 1, -1, 1, 1, 1, -1, -1, -1, 1, 1, -1}};
}

Flock obzcp_suboptimal() {
  return {{-1, 1, 1, -1, -1, 1, 1, 1, -1, -1, -1, -1, -1, 1, -1},
          {-1, -1, 1, -1, 1, -1, -1, -1, -1, -1, -1, 1, 1, -1, 1}};
}

BinarySequence low_pmepr15() { return {-1, -1, -1, 1, 1, 1, -1, 1, -1, 1, -1, -1, 1, -1, -1}; }

Eigen::Matrix3d example_weights() {
  Eigen::Matrix3d w;
  w << 0, -0.5, 0.2, -0.5, 0, 0.6, 0.2, 0.6, 0;
  return w;
}
Eigen::Vector3d example_bias() { return {-0.1, 0.0, 0.1}; }
BinarySequence example_start() { return {1, -1, 1}; }
BinarySequence example_sync_next() { return {1, 1, -1}; }

BinarySequence stored_x1() { return {1, 1, -1}; }
BinarySequence stored_x2() { return {1, -1, 1}; }

Eigen::Matrix3d stored_encoding() {
  Eigen::Matrix3d w;
  w << 0, 0, 0, 0, 0, -2.0 / 3.0, 0, -2.0 / 3.0, 0;
  return w;
}

Eigen::Matrix3d perturbed_encoding() {
  Eigen::Matrix3d w;
  w << 0.01, 0, 0, 0, 0, -0.65, 0, -0.67, 0;
  return w;
}

std::vector<CheckRow> verify_all(int oversampling) {
  std::vector<CheckRow> rows;
  auto add = [&](std::string name, std::string expected, std::string actual, bool pass) {
    rows.push_back({std::move(name), std::move(expected), std::move(actual), pass});
  };

  {
    Rng rng(0);
    const std::vector<BinarySequence> xs{stored_x1(), stored_x2()};
    const auto enc = encode(xs, 0.0, rng);
    const double err = (enc.weights - stored_encoding()).cwiseAbs().maxCoeff();
    add("encoder, two stored patterns", "max |W - W_ref| = 0", num(err), err < 1e-15);
  }
  {
    Rng rng(0);
    const auto next = dhnn_step({example_start(), 0, 0.0}, example_weights(), example_bias(),
                                Synchronous{}, rng);
    add("synchronous step", example_sync_next().to_signs(), next.state.to_signs(),
        next.state == example_sync_next());
  }
  {
    const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
    std::set<BinarySequence> fixed;
    for (int m = 0; m < 8; ++m) {
      BinarySequence x({m & 1 ? -1 : 1, m & 2 ? -1 : 1, m & 4 ? -1 : 1});
      if (is_fixed_point(x, perturbed_encoding(), zero)) fixed.insert(x);
    }
    const std::set<BinarySequence> want{stored_x1(), stored_x1().negated(), stored_x2(),
                                        stored_x2().negated()};
    add("perturbed encoding attractors", join(want), join(fixed), fixed == want);
  }
  {
    const double g = mmf_gamma(radar_hpgan59());
    add("mismatched-filter SIR, 59-bit code", "45.16 +- 0.5", num(g),
        std::abs(g - kRadarHpgan59Gamma) <= 0.5);
  }
  {
    const double mf = mf_sir(barker13());
    add("merit factor, Barker 13", "169/12 = 14.0833", num(mf),
        std::abs(mf - 169.0 / 12.0) <= 1e-9);
  }
  {
    const auto best = legendre_best_rotation(59);
    const double ratio = kRadarHpgan59Gamma / best.gamma_mmf;
    add("SIR gain over Legendre 59 (best rotation)", "about 4, in [3, 5]",
        num(ratio, 4) + " (rotation " + std::to_string(best.rotation) + ")",
        ratio >= 3.0 && ratio <= 5.0);
  }
  {
    const double p = pmepr(low_pmepr15(), oversampling);
    add("PMEPR, length-15 sequence", "1.6667 +- 0.01", num(p),
        std::abs(p - 1.6667) <= 0.01);
  }
  {
    const auto prof = zcp_profile(obzcp_type1(), oversampling);
    add("Type-I pair: front ZCZ, out-of-zone", "8, 2",
        std::to_string(prof.front_zcz) + ", " + std::to_string(prof.out_of_zone_max),
        prof.front_zcz == 8 && prof.out_of_zone_max == 2);
  }
  {
    const auto prof = zcp_profile(obzcp_type2(), oversampling);
    add("Type-II pair: tail ZCZ", "8", std::to_string(prof.tail_zcz), prof.tail_zcz == 8);
  }
  {
    const auto set = obzcp_train_set();
    std::size_t max_zcz = 0;
    double min_pm = 1e300;
    for (const auto& p : set) {
      const auto prof = zcp_profile(p, kObzcpTrainOversampling);
      max_zcz = std::max(max_zcz, prof.zcz_width());
      for (double v : prof.pmepr_per_sequence) min_pm = std::min(min_pm, v);
    }
    add("Z-complementary training set: size, max ZCZ, min PMEPR", "128, 4, 1.7272 +- 0.001",
        std::to_string(set.size()) + ", " + std::to_string(max_zcz) + ", " + num(min_pm),
        set.size() == 128 && max_zcz == 4 && std::abs(min_pm - 1.7272) <= 1e-3);
  }
  {
    Rng rng(1);
    const auto sets = moccs_train_set(200, rng);
    long worst = 0;
    for (const auto& s : sets) worst = std::max(worst, moccs_metric(s));
    std::set<SequenceSet> distinct(sets.begin(), sets.end());
    add("complementary code set pool", "200 distinct, metric 0",
        std::to_string(distinct.size()) + " distinct, max metric " + std::to_string(worst),
        distinct.size() == 200 && worst == 0);
  }
  {
    SearchConfig moccs;
    moccs.problem = {ProblemKind::Moccs, 2, 2, 8};
    SearchConfig radar;
    radar.problem = {ProblemKind::Radar, 1, 1, 59};
    const auto g1 = moccs.generator_arch().output_width();
    const auto g2 = radar.generator_arch().output_width();
    add("generator output widths", "1024, 3481", std::to_string(g1) + ", " + std::to_string(g2),
        g1 == 1024 && g2 == 3481);
  }
  return rows;
}

}  // namespace hpgan::reference
