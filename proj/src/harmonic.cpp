#include "liouville/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "liouville/errors.hpp"

namespace lv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t require_index(const WordBall& ball, const GroupElement& g, const char* what) {
  ball.model().check(g);
  const auto idx = ball.index_of(g.key);
  if (!idx) {
    throw TruncationError(std::string(what) + " " + ball.model().describe(g.key) + " lies outside the domain W_" +
                          std::to_string(ball.radius()));
  }
  return *idx;
}

}  // namespace

double WindowFunction::at(std::string_view key) const {
  const auto idx = window->index_of(key);
  if (!idx) throw UsageError("element " + window->model().describe(key) + " outside the function window");
  return values[*idx];
}

WindowFunction make_window_function(ModelPtr model, int radius, const std::function<double(const GroupElement&)>& f) {
  WindowFunction out;
  out.window = std::make_shared<const WordBall>(WordBall::enumerate(std::move(model), radius));
  out.values.reserve(out.window->size());
  for (std::size_t i = 0; i < out.window->size(); ++i) out.values.push_back(f(out.window->element(i)));
  return out;
}

double harmonic_residual(const WindowFunction& f, const GroupElement& x, const Measure& mu) {
  const auto& model = f.window->model();
  model.check(x);
  if (mu.model().id() != model.id()) throw UsageError("measure and function live on different models");
  const auto ix = f.window->index_of(x.key);
  std::vector<std::string> missing;
  if (!ix) missing.push_back(model.describe(x.key));
  double mean = 0.0;
  for (const auto& a : mu.atoms()) {
    const auto key = model.multiply(x.key, a.key);
    const auto idx = f.window->index_of(key);
    if (!idx) {
      missing.push_back(model.describe(key));
      continue;
    }
    mean += a.weight * f.values[*idx];
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
    throw UsageError("x supp(mu) leaves the window W_" + std::to_string(f.radius()) + ": missing " + list);
  }
  return std::abs(f.values[*ix] - mean);
}

bool is_diverging(const WordBall& ball, std::span<const GroupElement> zseq) {
  if (zseq.size() < 2) return false;
  std::unordered_set<Key> seen;
  int previous = -1;
  for (const auto& z : zseq) {
    const auto idx = ball.index_of(z.key);
    if (!idx) throw UsageError("sequence term " + ball.model().describe(z.key) + " outside the enumerated ball");
    const int length = ball.length_of(*idx);
    if (length <= previous || !seen.insert(z.key).second) return false;
    previous = length;
  }
  return true;
}

MartinLimit martin_limit(const Measure& mu, std::span<const GroupElement> zseq, const GroupElement& y, int window,
                         const PotentialOptions& options) {
  if (zseq.empty()) throw UsageError("martin_limit needs a non-empty sequence");
  if (window < 1) throw UsageError("martin_limit window radius must be at least 1");
  if (!options.allow_recurrent && mu.model().transience_excluded())
    throw TransienceError("walks on " + mu.model().spec() + " are recurrent");
  const auto domain = make_walk_domain(mu, options, window + 1);
  const auto& ball = domain->ball();
  const auto iy = require_index(ball, y, "origin");
  const auto size = ball.cardinality(window);

  MartinLimit out;
  out.domain_radius = ball.radius();
  out.trunc = options.trunc;
  for (const auto& z : zseq) require_index(ball, z, "sequence term");
  out.diverging = is_diverging(ball, zseq);

  for (const auto& z : zseq) {
    const auto column = ColumnField::compute(*domain, *ball.index_of(z.key), options.trunc);
    const double gy = column.values[iy];
    if (!(gy > 0.0)) {
      throw TruncationError("g(" + ball.model().describe(y.key) + ", " + ball.model().describe(z.key) +
                            ") is zero at K = " + std::to_string(options.trunc));
    }
    std::vector<double> row(size);
    for (std::size_t i = 0; i < size; ++i) {
      row[i] = column.values[i] / gy;
      out.max_tail_residual = std::max(out.max_tail_residual, column.last_term[i] / gy);
    }
    out.terms.push_back(std::move(row));
  }

  const auto T = out.terms.size();
  out.cauchy_delta.assign(size, 0.0);
  for (std::size_t t = T > 3 ? T - 2 : 1; t < T; ++t) {
    for (std::size_t i = 0; i < size; ++i)
      out.cauchy_delta[i] = std::max(out.cauchy_delta[i], std::abs(out.terms[t][i] - out.terms[t - 1][i]));
  }
  for (auto d : out.cauchy_delta) out.max_cauchy_delta = std::max(out.max_cauchy_delta, d);

  out.candidate.window = std::make_shared<const WordBall>(WordBall::enumerate(mu.model_ptr(), window));
  out.candidate.values = out.terms.back();
  return out;
}

Classification classify(const WindowFunction& candidate, const Measure& mu, double tol) {
  const auto& ball = *candidate.window;
  if (mu.model().id() != ball.model().id()) throw UsageError("measure and function live on different models");
  Classification out;
  double lo = kInf, hi = -kInf;
  for (auto v : candidate.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out.positive = lo > 0.0;
  out.ratio = lo > 0.0 ? hi / lo : kInf;
  out.nonconstant = out.ratio > 1.0 + tol;

  const auto& model = ball.model();
  std::size_t worst = ball.size();
  for (std::size_t i = 0; i < ball.size(); ++i) {
    bool inside = true;
    double mean = 0.0;
    for (const auto& a : mu.atoms()) {
      const auto idx = ball.index_of(model.multiply(ball.key(i), a.key));
      if (!idx) {
        inside = false;
        break;
      }
      mean += a.weight * candidate.values[*idx];
    }
    if (!inside) continue;
    ++out.interior;
    const double r = std::abs(candidate.values[i] - mean);
    if (worst == ball.size() || r > out.max_residual) {
      out.max_residual = r;
      worst = i;
    }
  }
  if (out.interior == 0) {
    throw UsageError("window W_" + std::to_string(ball.radius()) + " has no interior point for this measure");
  }
  out.worst = ball.element(worst);
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::consistent_with_liouville:
      return "consistent-with-Liouville";
    case Verdict::obstruction_witnessed:
      return "obstruction-witnessed";
    default:
      return "inconclusive";
  }
}

double ObstructionReport::r_of(int n) const {
  if (delta_hat >= 1.0) return kInf;
  return -(n - n0) * std::log1p(-delta_hat) - n0 * std::log(c_hat);
}

ObstructionReport obstruction_report(const Measure& mu, const ObstructionOptions& options) {
  if (options.n0 < 1) throw UsageError("n0 must be at least 1");
  if (options.window <= options.n0) throw UsageError("window must exceed n0");
  const auto verdict = nondegenerate(mu, options.n0);
  if (!verdict.nondegenerate) {
    throw UsageError("measure is degenerate up to radius " + std::to_string(options.n0) + ": " +
                     mu.model().format(*verdict.first_uncovered) + " is not reached");
  }

  const Potential pot(mu, options.potential);
  const auto& model = pot.model();
  const auto& ball = pot.domain().ball();
  const auto e = model.identity();

  ObstructionReport out;
  out.n0 = options.n0;
  out.window = options.window;
  out.trunc = pot.trunc();
  out.domain_radius = ball.radius();
  out.margin = options.margin;

  bool first = true;
  for (std::size_t j = 0; j < model.generators().size(); ++j) {
    const auto h = model.generator(j);
    const auto d = pot.deviation_outside_ball(options.n0, e, h, options.window);
    const auto wide = pot.deviation_outside_ball(options.n0, e, h, options.window + 2);
    if (first || d.value > out.delta_hat) {
      out.delta_hat = d.value;
      out.delta_generator = h;
      out.delta_witness = d.argmax;
    }
    out.delta_hat_wide = first ? wide.value : std::max(out.delta_hat_wide, wide.value);
    first = false;
  }

  out.c_hat = kInf;
  for (std::size_t j = 0; j < model.generators().size(); ++j) {
    const auto hinv = model.invert(model.generators()[j].key);
    for (std::size_t i = 0; i < ball.cardinality(options.n0); ++i) {
      const double k = pot.estimate(i) / pot.estimate(model.multiply(hinv, ball.key(i)));
      if (k < out.c_hat) {
        out.c_hat = k;
        out.c_generator = model.generator(j);
        out.c_witness = ball.element(i);
      }
    }
  }

  const auto growth_ball = WordBall::within_budget(mu.model_ptr(), options.growth_budget, options.growth_radius);
  out.growth_radius = growth_ball.radius();
  out.growth_word = growth_rate(growth_ball).rate;
  out.bound_rate = out.delta_hat >= 1.0 ? kInf : -std::log1p(-out.delta_hat);

  if (out.delta_hat < 1.0) {
    const double ln_gee = std::log(pot.estimate(std::size_t{0}));
    for (int n = options.n0 + 1; n <= options.window; ++n) {
      ContainmentRow row;
      row.n = n;
      row.radius = out.r_of(n);
      const auto [lo, hi] = ball.sphere(n);
      for (auto i = lo; i < hi; ++i) row.max_distance = std::max(row.max_distance, ln_gee - std::log(pot.estimate(i)));
      row.holds = row.max_distance <= row.radius + 1e-9;
      if (!row.holds) ++out.containment_violations;
      out.containment.push_back(row);
    }
  }

  const double drift = std::abs(out.delta_hat_wide - out.delta_hat);
  if (out.delta_hat >= 1.0) {
    out.verdict = Verdict::obstruction_witnessed;
    out.reason = "delta_hat >= 1: some Martin kernel stays away from 1 outside W_n0";
  } else if (out.bound_rate < out.growth_word - options.margin) {
    out.verdict = Verdict::obstruction_witnessed;
    out.reason = "word growth exceeds the Green-metric bound -ln(1 - delta_hat) by more than the margin";
  } else if (out.containment_violations > 0) {
    out.verdict = Verdict::inconclusive;
    out.reason = "containment of spheres in Green balls B_g(r(n)) fails at some radius";
  } else if (drift > options.stability) {
    out.verdict = Verdict::inconclusive;
    out.reason = "delta_hat moves by more than the stability tolerance between windows N and N+2";
  } else {
    out.verdict = Verdict::consistent_with_liouville;
    out.reason = "measured word growth stays below the Green-metric bound -ln(1 - delta_hat)";
  }
  return out;
}

ProductIdentity product_identity_check(const Potential& potential, std::span<const std::size_t> word) {
  if (word.empty()) throw UsageError("product identity needs a word of length at least 1");
  const auto& model = potential.model();
  const auto e = model.identity();
  const auto x = model.word(word);

  // Suffixes w_i = h_{i+1} ... h_n = x_i^-1 x, built right to left.
  std::vector<GroupElement> suffix(word.size() + 1);
  suffix[word.size()] = e;
  for (std::size_t i = word.size(); i-- > 0;) suffix[i] = model.mul(model.generator(word[i]), suffix[i + 1]);

  ProductIdentity out;
  out.telescoped = potential.green(e, e).midpoint();
  for (std::size_t i = 0; i < word.size(); ++i)
    out.telescoped *= potential.martin(e, suffix[i], model.generator(word[i])).value;
  out.direct = potential.green(e, x).midpoint();
  if (!(out.direct > 0.0)) throw TruncationError("g(e, x) is zero at K = " + std::to_string(potential.trunc()));
  out.residual = std::abs(out.telescoped - out.direct) / out.direct;
  return out;
}

}  // namespace lv
