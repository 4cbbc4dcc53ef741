// Acceptance checks. Each criterion prints one line, "PASS <name> ..." or
// "FAIL <name> ...". With no arguments every criterion runs; otherwise only
// the named ones. Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "common/oracles.hpp"
#include "swarmnav/checkpoint.hpp"
#include "swarmnav/geodesic.hpp"
#include "swarmnav/harness.hpp"
#include "swarmnav/observation.hpp"
#include "swarmnav/rewards.hpp"
#include "swarmnav/rng.hpp"
#include "swarmnav/trainer.hpp"

using namespace swarmnav;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) note << "failed: ";
      else note << "; ";
      note << what;
      pass = false;
    }
  }
};

using Check = std::function<void(Outcome&)>;

bool exact(double got, double want) { return std::abs(got - want) <= 1e-12; }

void reward_algebra(Outcome& o) {
  o.require(exact(navigation_reward(3.0, 3.0), 1.0), "r_n(3) = 1");
  o.require(exact(navigation_reward(4.0, 3.0), 0.5), "r_n(4) = 0.5");
  o.require(exact(navigation_reward(0.5, 3.0), 1.0), "r_n below D_s = 1");
  o.require(navigation_reward(kUnreachable, 3.0) == 0.0, "r_n(unreachable) = 0");
  o.require(exact(safety_reward({{0.0, 0.0, 0.0}}), 1.0), "r_s(sum 0) = 1");
  o.require(exact(safety_reward({{1.0, 1.0, 1.0}}), 0.25), "r_s(sum 3) = 0.25");
  o.require(exact(safety_reward({{0.5, 0.25, 0.25}}), 0.5), "r_s(sum 1) = 0.5");
  const Vec3 me{0, 0, 0};
  const std::vector<Vec3> one{{4, 0, 0}};
  o.require(exact(organization_reward(me, one, 3.0, 9.0), 1.0 / 6.0), "r_o single neighbor at 4 = 1/6");
  const std::vector<Vec3> two{{0, 4, 0}, {0, 0, -6}};
  o.require(exact(organization_reward(me, two, 3.0, 9.0), (0.5 + 0.25) / 6.0), "r_o two neighbors");
  const std::vector<Vec3> close{{0, 2, 0}};
  o.require(organization_reward(me, close, 3.0, 9.0) == -1.0, "r_o too close = -1");
  o.require(organization_reward(me, {}, 3.0, 9.0) == -1.0, "r_o isolated = -1");
  const std::vector<Vec3> far{{10, 0, 0}};
  o.require(organization_reward(me, far, 3.0, 9.0) == -1.0, "r_o beyond D_c = -1");
  const std::vector<Vec3> crowd{{0, 1, 0}, {1, 0, 0}, {0, 0, 1}, {5, 0, 0}};
  o.require(organization_reward(me, crowd, 3.0, 9.0) == -1.0, "r_o clamped at -1");

  const std::vector<int> ids{0, 1, 2, 3};
  const SwarmRewards s = swarm_reward(ids, std::vector<double>{1.0, 0.5, 2.0, 0.0}, {{0, 1}, {2, 3}});
  o.require(s.rs_per_swarm.size() == 2 && exact(s.rs_per_swarm[0], 0.75) && exact(s.rs_per_swarm[1], 1.0),
            "per-swarm means");
  o.require(exact(s.r_ms, 0.875), "r_ms is the mean over swarms");
  if (o.pass) o.note << "boundary values exact to 1e-12";
}

void hvc_conformance(Outcome& o) {
  Rng rng(1001);
  const int K = 32;
  const double Dc = 9.0, Ds = 3.0;
  int mismatched = 0, mass_violations = 0, mass_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 me{rng.uniform(0, 30), rng.uniform(0, 30), rng.uniform(0, 30)};
    const bool in_band_only = trial % 2 == 0;
    const int n = 1 + static_cast<int>(rng.below(12));
    std::vector<Vec3> others;
    for (int i = 0; i < n; ++i) {
      Vec3 d{rng.normal(), rng.normal(), rng.normal()};
      const double len = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
      const double r = in_band_only ? rng.uniform(Ds, Dc) : rng.uniform(0.0, 12.0);
      others.push_back({me.x + d.x / len * r, me.y + d.y / len * r, me.z + d.z / len * r});
    }
    const auto got = hvc(me, others, K, Dc, Ds);
    const auto want = oracle::hvc(me, others, K, Dc, Ds);
    bool same = got.size() == want.size();
    for (std::size_t b = 0; same && b < got.size(); ++b) same = std::abs(got[b] - want[b]) <= 1e-12;
    mismatched += !same;
    if (in_band_only) {
      double mass = 0.0;
      for (double x : got) mass += x;
      ++mass_checked;
      mass_violations += mass < 0.1 - 1e-12 || mass > 0.25 + 1e-12;
    }
  }
  o.note << "1000 configurations, " << mismatched << " mismatched, " << mass_violations << "/" << mass_checked
         << " mass bound violations";
  o.require(mismatched == 0, "bin-for-bin agreement");
  o.require(mass_violations == 0, "mass within [0.1, 0.25]");
}

void geodesic_oracle(Outcome& o) {
  Rng rng(2002);
  const int n = 20;
  const double bound = 2.0 * 1.0 * std::sqrt(3.0);
  double worst = 0.0;
  int inf_mismatch = 0, below_bound = 0;
  for (int world = 0; world < 100; ++world) {
    std::vector<Aabb> boxes;
    const int count = 5 + static_cast<int>(rng.below(20));
    for (int b = 0; b < count; ++b) {
      boxes.push_back({{rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(0, 20)},
                       {rng.uniform(0.3, 3), rng.uniform(0.3, 3), rng.uniform(0.3, 3)}});
    }
    // An occasional full wall with a small opening.
    if (world % 5 == 0) {
      const double x = 5 + rng.uniform(0, 10);
      boxes.push_back({{x, 10, 5.5}, {0.5, 10, 4.5}});
      boxes.push_back({{x, 10, 16}, {0.5, 10, 4}});
      boxes.push_back({{x, 5, 11}, {0.5, 5, 1}});
      boxes.push_back({{x, 16, 11}, {0.5, 4, 1}});
    }
    const oracle::VoxelWorld ref(boxes, n);
    int ti, tj, tk;
    do {
      ti = static_cast<int>(rng.below(n));
      tj = static_cast<int>(rng.below(n));
      tk = static_cast<int>(rng.below(n));
    } while (ref.occ(ti, tj, tk));
    const Target target{0, {ti + rng.uniform(0.1, 0.9), tj + rng.uniform(0.1, 0.9), tk + rng.uniform(0.1, 0.9)}, {}};
    auto grid = std::make_shared<const OccupancyGrid>(rasterize(boxes, 20.0, 1.0));
    const DistanceField field = build_field(grid, target);
    const auto want = ref.dijkstra(ti, tj, tk);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double w = want[ref.idx(i, j, k)];
          const double g = field.at(i, j, k);
          if (std::isinf(w) || std::isinf(g)) {
            inf_mismatch += std::isinf(w) != std::isinf(g);
            continue;
          }
          worst = std::max(worst, std::abs(w - g));
          const Vec3 c{i + 0.5, j + 0.5, k + 0.5};
          below_bound += g < distance(c, target.position) - bound;
          const Vec3 p{i + rng.uniform(), j + rng.uniform(), k + rng.uniform()};
          below_bound += geodesic_distance(field, p) < distance(p, target.position) - bound;
        }
  }
  o.note << "100 worlds, max |field - dijkstra| = " << worst << ", reachability mismatches " << inf_mismatch
         << ", bound violations " << below_bound;
  // Equal-length paths summed in a different order can differ in the last bits.
  o.require(worst <= 1e-9, "field equals Dijkstra");
  o.require(inf_mismatch == 0, "same reachable set");
  o.require(below_bound == 0, "geodesic >= Euclidean - 2*sqrt(3)");
}

void gradient_checks(Outcome& o) {
  double worst = 0.0;
  for (const std::string preset : {"default", "customized-ppo"}) {
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
      const auto r = oracle::gradient_check(preset, seed, 16, 4);
      o.require(r.policy <= 1e-4, preset + " policy loss");
      o.require(r.value <= 1e-4, preset + " value loss");
      o.require(r.entropy <= 1e-4, preset + " entropy loss");
      worst = std::max({worst, r.policy, r.value, r.entropy});
    }
  }
  if (o.pass) o.note << "2x64 and 3x128, worst relative error " << worst;
}

void gae_oracle(Outcome& o) {
  Rng rng(3003);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t T = 1 + rng.below(200);
    std::vector<double> r(T), v(T + 1);
    std::vector<int> d(T);
    for (auto& x : r) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    for (auto& x : d) x = rng.uniform() < 0.05;
    const double gamma = rng.uniform(0.8, 1.0), lambda = rng.uniform();
    const auto got = gae(r, v, d, gamma, lambda);
    const auto want = oracle::gae(r, v, d, gamma, lambda);
    for (std::size_t t = 0; t < T; ++t) {
      worst = std::max(worst, std::abs(got.advantages[t] - want.advantages[t]));
      worst = std::max(worst, std::abs(got.returns[t] - want.returns[t]));
    }
  }
  o.require(worst <= 1e-10, "random sequences match the double loop");

  // lambda = 0: one-step TD residual.
  bool td_exact = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> r(30), v(31);
    std::vector<int> d(30);
    for (auto& x : r) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    for (auto& x : d) x = rng.uniform() < 0.1;
    const auto g = gae(r, v, d, 0.97, 0.0);
    for (std::size_t t = 0; t < r.size(); ++t) {
      td_exact = td_exact && g.advantages[t] == r[t] + 0.97 * (d[t] ? 0.0 : v[t + 1]) - v[t];
    }
  }
  o.require(td_exact, "lambda = 0 collapses to the TD residual");

  // lambda = 1: discounted return minus the baseline. Dyadic data keeps
  // every partial sum exact regardless of summation order.
  bool mc_exact = true;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t T = 20;
    std::vector<double> r(T), v(T + 1);
    std::vector<int> d(T);
    for (auto& x : r) x = static_cast<double>(rng.below(9)) - 4.0;
    for (auto& x : v) x = static_cast<double>(rng.below(9)) - 4.0;
    for (auto& x : d) x = rng.uniform() < 0.1;
    const double gamma = 0.5;
    const auto g = gae(r, v, d, gamma, 1.0);
    for (std::size_t t = 0; t < T; ++t) {
      double ret = 0.0, w = 1.0;
      std::size_t l = t;
      for (; l < T; ++l) {
        ret += w * r[l];
        w *= gamma;
        if (d[l]) break;
      }
      if (l == T) ret += w * v[T];
      mc_exact = mc_exact && g.advantages[t] == ret - v[t] && g.returns[t] == ret;
    }
  }
  o.require(mc_exact, "lambda = 1 collapses to the discounted return");
  if (o.pass) o.note << "max deviation " << worst;
}

void experiment3_contrast(Outcome& o) {
  const auto runs = run_experiment("3", "oracle", kDefaultExperimentSeed);
  o.require(runs.size() == 2, "two runs");
  if (runs.size() != 2) return;
  o.note << runs[0].scenario.name << ": " << runs[0].verdict.label << ", " << runs[1].scenario.name << ": "
         << runs[1].verdict.label;
  o.require(runs[0].scenario.task.metric == DistanceMetric::euclidean && runs[0].verdict.label == "stalled",
            "Euclidean run stalls");
  o.require(runs[1].scenario.task.metric == DistanceMetric::geodesic && runs[1].verdict.label == "reached",
            "geodesic run reaches");
}

void island_behavior(Outcome& o) {
  const auto runs = run_experiment("5b", "oracle", kDefaultExperimentSeed);
  // Recomputed from the logged step records, not from the verdict.
  std::vector<int> counts;
  std::vector<std::vector<int>> sizes;
  for (const auto& line : runs.at(0).log) {
    const json j = json::parse(line);
    if (j.at("type") != "step") continue;
    counts.push_back(j.at("components").get<int>());
    std::map<int, int> members;
    for (const auto& a : j.at("agents")) ++members[a.at("component").get<int>()];
    std::vector<int> s;
    for (const auto& [c, m] : members) s.push_back(m);
    sizes.push_back(s);
  }
  std::vector<int> seq;
  for (int c : counts) {
    if (seq.empty() || seq.back() != c) seq.push_back(c);
  }
  std::size_t split = counts.size(), merge = counts.size();
  for (std::size_t t = 1; t < counts.size(); ++t) {
    if (split == counts.size() && counts[t - 1] == 1 && counts[t] == 2) split = t;
    else if (split < t && merge == counts.size() && counts[t - 1] == 2 && counts[t] == 1) merge = t;
  }
  o.note << "component sequence";
  for (int c : seq) o.note << ' ' << c;
  o.require(split < counts.size(), "1 -> 2 on separation");
  o.require(merge < counts.size(), "2 -> 1 on approach");
  if (split < counts.size() && merge < counts.size()) {
    const auto& s = sizes[merge - 1];
    o.note << ", sizes before merging";
    for (int x : s) o.note << ' ' << x;
    o.require(s.size() == 2 && std::abs(s[0] - s[1]) <= 1, "sub-swarm sizes differ by at most 1");
  }
  o.require(runs[0].verdict.pass, "scenario verdict " + runs[0].verdict.label);
}

double mean_of(const std::vector<MetricRecord>& rows, std::size_t begin, std::size_t end,
               double MetricRecord::*field) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const double x = rows[i].*field;
    if (std::isnan(x)) continue;  // no episode finished within that window
    sum += x;
    ++n;
  }
  return n ? sum / n : std::nan("");
}

void training_smoke(Outcome& o, const std::string& algo, std::int64_t steps, int instances) {
  const auto dir = std::filesystem::temp_directory_path() / ("swarmnav_acceptance_" + algo);
  std::filesystem::remove_all(dir);
  TrainOptions opt;
  opt.algo = algo;
  opt.steps = steps;
  opt.instances = instances;
  opt.seed = 1;
  opt.out_dir = dir.string();
  const Scenario scenario = smoke_scenario();
  const TrainResult r = train(scenario, opt);
  const auto& m = r.metrics;
  o.require(m.size() >= 10, "at least ten metric rows");
  if (m.size() < 10) return;
  const std::size_t tenth = std::max<std::size_t>(1, m.size() / 10);
  const double mcr_first = mean_of(m, 0, tenth, &MetricRecord::mcr);
  const double mcr_last = mean_of(m, m.size() - tenth, m.size(), &MetricRecord::mcr);
  const double ent_first = mean_of(m, 0, tenth, &MetricRecord::entropy);
  const double ent_last = mean_of(m, m.size() - tenth, m.size(), &MetricRecord::entropy);
  // Evaluation reuses the training seed.
  const EvalSummary eval = evaluate("model:" + (dir / "checkpoint.json").string(), scenario, 5, opt.seed);
  o.note << m.size() << " updates, MCR " << mcr_first << " -> " << mcr_last << ", entropy " << ent_first << " -> "
         << ent_last << ", eval tracking " << eval.mean_tracking;
  o.require(mcr_last >= 1.25 * mcr_first, "final MCR >= 1.25x initial");
  o.require(ent_last < ent_first, "entropy decreases");
  o.require(eval.mean_tracking >= 0.6, "eval tracking >= 0.6");
  std::filesystem::remove_all(dir);
}

void determinism(Outcome& o) {
  for (const std::string id : {"1b", "5b"}) {
    const auto a = run_experiment(id, "oracle", 11);
    const auto b = run_experiment(id, "oracle", 11);
    o.require(a.size() == b.size() && a[0].log == b[0].log, "experiment " + id + " logs");
  }
  Scenario s = smoke_scenario();
  s.duration = 200;
  MemoryLog la, lb;
  evaluate("oracle", s, 2, 5, &la);
  evaluate("oracle", s, 2, 5, &lb);
  o.require(la.lines == lb.lines, "eval logs");

  for (const std::string algo : {"ppo", "sac"}) {
    TrainOptions opt;
    opt.algo = algo;
    opt.steps = 4096;
    opt.instances = 2;
    opt.seed = 3;
    if (algo == "ppo") opt.overrides = {{"time_horizon", 64}, {"batch_size", 256}, {"buffer_size", 1024}};
    else opt.overrides = {{"buffer_initial_steps", 1}, {"batch_size", 64}};
    const TrainResult a = train(s, opt);
    const TrainResult b = train(s, opt);
    bool same = a.metrics.size() == b.metrics.size() && !a.metrics.empty();
    for (std::size_t i = 0; same && i < a.metrics.size(); ++i) {
      const auto &x = a.metrics[i], &y = b.metrics[i];
      const auto eq = [](double p, double q) { return p == q || (std::isnan(p) && std::isnan(q)); };
      same = x.update == y.update && x.steps == y.steps && eq(x.mcr, y.mcr) && eq(x.vl, y.vl) && eq(x.pl, y.pl) &&
             eq(x.entropy, y.entropy);
    }
    o.require(same, algo + " metrics");
    o.require(a.checkpoint.dump() == b.checkpoint.dump(), algo + " checkpoint");
  }
  if (o.pass) o.note << "experiments, evaluation and both trainers repeat bit for bit";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::pair<Check, double>>> criteria{
      {"reward_algebra", {reward_algebra, 1}},
      {"hvc_conformance", {hvc_conformance, 5}},
      {"geodesic_oracle", {geodesic_oracle, 30}},
      {"gradient_checks", {gradient_checks, 60}},
      {"gae_oracle", {gae_oracle, 5}},
      {"experiment3_contrast", {experiment3_contrast, 60}},
      {"island_behavior", {island_behavior, 60}},
      {"training_smoke_ppo", {[](Outcome& o) { training_smoke(o, "ppo", 200000, 1); }, 1200}},
      {"training_smoke_sac", {[](Outcome& o) { training_smoke(o, "sac", 300000, 4); }, 1200}},
      {"determinism", {determinism, 600}},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted) {
    bool known = false;
    for (const auto& c : criteria) known = known || c.first == w;
    if (!known) {
      std::cerr << "unknown criterion " << w << "\n";
      return 2;
    }
  }
  int failures = 0;
  for (const auto& [name, entry] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      entry.first(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > entry.second) o.require(false, "took longer than " + std::to_string(entry.second) + " s");
    std::printf("%s %s (%s; %.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.note.str().c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
