// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "liouville/errors.hpp"
#include "liouville/gridlab.hpp"
#include "liouville/harmonic.hpp"
#include "liouville/measure.hpp"
#include "liouville/potential.hpp"
#include "liouville/scenario.hpp"
#include "oracles.hpp"

namespace {

using Clock = std::chrono::steady_clock;

// Tolerances and parameters, fixed here so every run is judged the same way.
constexpr double kGreenTol = 1e-3;
constexpr int kGreenTrunc = 200;
constexpr double kGreenSeconds = 30.0;
constexpr double kTelescopeTol = 1e-6;
constexpr int kTelescopeWords = 50;
constexpr int kTelescopeMaxLength = 8;
constexpr double kBallLow = 0.85, kBallHigh = 1.15;
constexpr double kBallStep = 0.01;
constexpr int kMartinTrunc = 400;
constexpr double kMartinRatio = 2.0, kMartinResidual = 1e-3, kBusemannRel = 0.05;
constexpr int kDeviationTrunc = 400;
constexpr double kDeviationLast = 0.3;
constexpr double kZ3Delta = 0.5, kZ3Growth = 0.2;
constexpr double kGamblerTol = 1e-12, kSmpTol = 1e-10, kMeanValueTol = 1e-10;
constexpr int kNestedPairs = 20;
constexpr double kMcTv = 0.02;
constexpr std::uint64_t kMcPaths = 100000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Outcome free_green_values() {
  const auto t0 = Clock::now();
  const auto model = lv::make_free(2);
  lv::PotentialOptions opts;
  opts.trunc = kGreenTrunc;
  const lv::Potential p(lv::simple_random_walk(model), opts);
  const auto e = model->identity();
  const auto ball = lv::WordBall::enumerate(model, 4);
  double worst = 0;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const auto w = ball.element(i);
    const auto g = p.green(e, w);
    const double exact = oracle::tree_green(2, oracle::free_length(model->format(w)));
    worst = std::max({worst, std::abs(g.lower - exact), std::abs(g.upper - exact)});
  }
  const double secs = seconds_since(t0);
  return {worst < kGreenTol && secs < kGreenSeconds,
          "max bracket error over W_4 " + fmt(worst) + " (tol " + fmt(kGreenTol) + "), " + fmt(secs) + " s (limit " +
              fmt(kGreenSeconds) + " s)"};
}

Outcome telescoping() {
  std::mt19937_64 rng(20240601);
  double worst = 0;
  std::string where;
  for (const auto* spec : {"free:2", "heisenberg", "lamplighter"}) {
    const auto model = lv::parse_model_spec(spec);
    lv::PotentialOptions opts;
    opts.trunc = kGreenTrunc;
    const lv::Potential p(lv::simple_random_walk(model), opts);
    std::uniform_int_distribution<std::size_t> letter(0, model->generators().size() - 1);
    std::uniform_int_distribution<int> length(1, kTelescopeMaxLength);
    for (int k = 0; k < kTelescopeWords; ++k) {
      std::vector<std::size_t> word(static_cast<std::size_t>(length(rng)));
      for (auto& l : word) l = letter(rng);
      const auto r = lv::product_identity_check(p, word);
      if (r.residual >= worst) {
        worst = r.residual;
        where = spec;
      }
    }
  }
  return {worst < kTelescopeTol, "max relative residual " + fmt(worst) + " (" + where + ", tol " +
                                     fmt(kTelescopeTol) + ") over " + std::to_string(kTelescopeWords) +
                                     " words per group"};
}

Outcome green_ball_growth() {
  const auto model = lv::make_free(2);
  lv::PotentialOptions opts;
  opts.trunc = kGreenTrunc;
  const lv::Potential p(lv::simple_random_walk(model), opts);
  const int search = p.domain().radius() - 2;
  double lo = 1e300, hi = -1e300, at_lo = 0, at_hi = 0;
  bool complete = true;
  for (int i = 0; 2.0 + i * kBallStep <= 8.0 + 1e-12; ++i) {
    const double r = 2.0 + i * kBallStep;
    const auto b = p.green_ball(r, search);
    complete = complete && b.complete;
    const double v = std::log(static_cast<double>(b.count())) / r;
    if (v < lo) lo = v, at_lo = r;
    if (v > hi) hi = v, at_hi = r;
  }
  return {complete && lo >= kBallLow && hi <= kBallHigh,
          "(1/r) ln|B_g(r)| spans [" + fmt(lo) + " at r=" + fmt(at_lo) + ", " + fmt(hi) + " at r=" + fmt(at_hi) +
              "] on r in [2,8] step " + fmt(kBallStep) + ", required [" + fmt(kBallLow) + ", " + fmt(kBallHigh) +
              "]"};
}

Outcome martin_limits() {
  bool pass = true;
  std::ostringstream detail;
  const std::vector<std::pair<std::string, std::string>> cases{{"free:2", "a"}, {"lamplighter", "t"}, {"bs:1:2", "t"}};
  for (const auto& [spec, letter] : cases) {
    const auto model = lv::parse_model_spec(spec);
    const auto mu = lv::simple_random_walk(model);
    const auto u = model->parse(letter);
    std::vector<lv::GroupElement> zseq;
    auto z = model->identity();
    for (int n = 1; n <= 12; ++n) {
      z = model->mul(z, u);
      if (n >= 8) zseq.push_back(z);
    }
    lv::PotentialOptions opts;
    opts.trunc = kMartinTrunc;
    const auto lim = lv::martin_limit(mu, zseq, model->identity(), 2, opts);
    const auto cls = lv::classify(lim.candidate, mu);
    bool ok = cls.positive && cls.ratio > kMartinRatio && cls.max_residual < kMartinResidual;
    detail << spec << ": ratio " << fmt(cls.ratio) << ", residual " << fmt(cls.max_residual);
    if (spec == "free:2") {
      double worst = 0;
      const auto& w = *lim.candidate.window;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double target = std::pow(3.0, oracle::free_busemann(model->format(w.element(i)), "a"));
        worst = std::max(worst, std::abs(lim.candidate.values[i] / target - 1.0));
      }
      ok = ok && worst < kBusemannRel;
      detail << ", max |K/3^beta - 1| " << fmt(worst);
    }
    detail << (ok ? "" : " [fails]") << "; ";
    pass = pass && ok;
  }
  return {pass, detail.str() + "thresholds ratio>" + fmt(kMartinRatio) + " residual<" + fmt(kMartinResidual) +
                    " busemann<" + fmt(kBusemannRel)};
}

Outcome z3_deviation() {
  const auto model = lv::make_free_abelian(3);
  lv::PotentialOptions opts;
  opts.trunc = kDeviationTrunc;
  const lv::Potential p(lv::simple_random_walk(model), opts);
  const auto a = model->parse("a"), e = model->identity();
  std::vector<double> values;
  for (int n = 2; n <= 8; ++n) values.push_back(p.deviation_outside_ball(n, a, e, n + 4).value);
  bool monotone = true;
  for (std::size_t i = 1; i < values.size(); ++i) monotone = monotone && values[i] <= values[i - 1];
  std::string list;
  for (auto v : values) list += (list.empty() ? "" : " ") + fmt(v);
  return {monotone && values.back() < kDeviationLast,
          "n=2..8: " + list + (monotone ? " (non-increasing)" : " (not monotone)") + ", last < " + fmt(kDeviationLast)};
}

Outcome obstruction_verdicts() {
  lv::ObstructionOptions free_opts;
  free_opts.n0 = 3;
  free_opts.window = 7;
  const auto f = lv::obstruction_report(lv::simple_random_walk(lv::make_free(2)), free_opts);

  lv::ObstructionOptions z_opts;
  z_opts.n0 = 6;
  z_opts.window = 10;
  z_opts.potential.trunc = kDeviationTrunc;
  const auto z = lv::obstruction_report(lv::simple_random_walk(lv::make_free_abelian(3)), z_opts);
  const bool pass = f.verdict == lv::Verdict::obstruction_witnessed &&
                    z.verdict == lv::Verdict::consistent_with_liouville && z.delta_hat < kZ3Delta &&
                    z.growth_word < kZ3Growth && z.bound_rate > z.growth_word;
  return {pass, "free:2 " + lv::to_string(f.verdict) + " (delta_hat " + fmt(f.delta_hat) + "); abelian:3 " +
                    lv::to_string(z.verdict) + " (delta_hat " + fmt(z.delta_hat) + " < " + fmt(kZ3Delta) +
                    ", growth " + fmt(z.growth_word) + " < " + fmt(kZ3Growth) + " < bound " + fmt(z.bound_rate) + ")"};
}

Outcome gridlab_checks() {
  using namespace lv::grid;
  double gambler = 0;
  for (int n = 2; n <= 40; ++n) {
    const auto D = GridDomain::interval(n);
    const auto K = exit_kernel(D);
    const auto right = *D.boundary_index({n, 0});
    for (std::size_t i = 0; i < D.interior().size(); ++i)
      gambler = std::max(gambler, std::abs(K(i, right) - static_cast<double>(D.interior()[i].x) / n));
  }

  double smp = 0, mean_value = 0;
  int monotone = 0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> data(-1.0, 1.0);
  for (int i = 0; i < kNestedPairs; ++i) {
    const int w = 6 + i % 5, h = 5 + i % 4;
    const auto outer = GridDomain::rectangle(w, h);
    const auto inner = GridDomain::rectangle(w - 2 - i % 2, h - 2, 1, 1);
    const auto x = inner.center();
    const Point y{x.x + 1, x.y};
    smp = std::max(smp, smp_check(inner, outer, x));
    if (nested_monotonicity(inner, outer, x, y).holds) ++monotone;
    const auto K = exit_kernel(outer);
    std::vector<double> f(outer.boundary().size());
    for (auto& v : f) v = data(rng);
    mean_value = std::max(mean_value, mean_value_residual(outer, harmonic_extension(outer, K, f), f));
  }
  const bool pass = gambler < kGamblerTol && smp < kSmpTol && monotone == kNestedPairs && mean_value < kMeanValueTol;
  return {pass, "gambler's ruin " + fmt(gambler) + " (tol " + fmt(kGamblerTol) + "), smp " + fmt(smp) + " (tol " +
                    fmt(kSmpTol) + "), monotone " + std::to_string(monotone) + "/" + std::to_string(kNestedPairs) +
                    ", mean value " + fmt(mean_value) + " (tol " + fmt(kMeanValueTol) + ")"};
}

Outcome monte_carlo() {
  using namespace lv::grid;
  const auto D = GridDomain::rectangle(5, 5);
  const auto mc = mc_exit_sampler(D, D.center(), 1, kMcPaths);
  return {mc.tv < kMcTv, "TV " + fmt(mc.tv) + " with " + std::to_string(kMcPaths) + " paths (tol " + fmt(kMcTv) + ")"};
}

lv::ScenarioConfig small_config(const std::string& scenario,
                                const std::vector<std::pair<std::string, std::string>>& values) {
  auto c = lv::ScenarioConfig::for_scenario(scenario);
  for (const auto& [key, value] : values) {
    const auto dot = key.find('.');
    c.set(key.substr(0, dot), key.substr(dot + 1), value);
  }
  c.finalize();
  return c;
}

Outcome determinism() {
  const std::vector<lv::ScenarioConfig> configs{
      small_config("growth", {{"growth.n", "8"}}),
      small_config("green", {{"green.trunc", "60"}, {"green.domain_budget", "200000"}, {"green.rmax", "5"}}),
      small_config("martin", {{"martin.trunc", "60"}, {"martin.domain_budget", "200000"}, {"martin.nmin", "3"},
                              {"martin.nmax", "5"}}),
      small_config("deviation", {{"run.model", "abelian:3"}, {"deviation.trunc", "60"},
                                 {"deviation.domain_budget", "200000"}, {"deviation.nmax", "3"},
                                 {"deviation.offset", "2"}}),
      small_config("obstruct", {{"obstruct.trunc", "60"}, {"obstruct.domain_budget", "200000"}, {"obstruct.n0", "2"},
                                {"obstruct.window", "4"}}),
      small_config("grid", {{"grid.domain", "rectangle:5x5"}, {"grid.paths", "20000"}, {"run.seed", "3"}}),
  };
  const int saved = omp_get_max_threads();
  std::size_t files = 0;
  std::string mismatch;
  for (const auto& c : configs) {
    omp_set_num_threads(1);
    const auto a = lv::run_scenario(c);
    omp_set_num_threads(4);
    const auto b = lv::run_scenario(c);
    const auto again = lv::run_scenario(c);
    files += a.files.size();
    if (a.files != b.files || b.files != again.files) mismatch += (mismatch.empty() ? "" : ",") + c.scenario();
  }
  omp_set_num_threads(saved);
  return {mismatch.empty(), std::to_string(configs.size()) + " scenarios, " + std::to_string(files) +
                                " files compared across 1 and 4 threads and repeated runs" +
                                (mismatch.empty() ? "" : "; differing: " + mismatch)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"free2-green-values", free_green_values},
      {"telescoping-identity", telescoping},
      {"green-ball-growth", green_ball_growth},
      {"martin-limits", martin_limits},
      {"z3-deviation", z3_deviation},
      {"obstruction-verdicts", obstruction_verdicts},
      {"gridlab-exact", gridlab_checks},
      {"monte-carlo-tv", monte_carlo},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.detail << " [" << fmt(seconds_since(t0)) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
