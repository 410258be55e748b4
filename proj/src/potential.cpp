#include "liouville/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "liouville/errors.hpp"

namespace lv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Recurrence heuristic: rho_hat this close to 1 and g(e,e) still growing by
// this fraction over the second half of the series.
constexpr double kRecurrentRho = 0.97;
constexpr double kRecurrentGrowth = 0.05;

void add_into(std::span<double> acc, std::span<const double> term) {
  const auto n = static_cast<std::ptrdiff_t>(term.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) acc[i] += term[i];
}

}  // namespace

std::string to_string(TailMode mode) {
  return mode == TailMode::geometric_bound ? "geometric-bound" : "heuristic";
}

std::shared_ptr<const WalkDomain> make_walk_domain(const Measure& mu, const PotentialOptions& options,
                                                   int min_radius) {
  if (options.trunc < 1) throw UsageError("truncation order must be at least 1");
  const int L = std::max(1, mu.support_radius());
  std::shared_ptr<const WordBall> ball;
  if (options.domain_radius > 0) {
    ball = std::make_shared<const WordBall>(
        WordBall::enumerate(mu.model_ptr(), std::max(options.domain_radius, min_radius)));
  } else {
    const long cap = static_cast<long>(options.trunc) * L;
    const int max_radius = static_cast<int>(std::min<long>(cap, 100000));
    auto auto_ball = WordBall::within_budget(mu.model_ptr(), options.domain_budget, std::max(max_radius, min_radius));
    if (auto_ball.radius() < min_radius && auto_ball.sphere_size(auto_ball.radius()) > 0)
      ball = std::make_shared<const WordBall>(WordBall::enumerate(mu.model_ptr(), min_radius));
    else
      ball = std::make_shared<const WordBall>(std::move(auto_ball));
  }
  return std::make_shared<const WalkDomain>(mu, std::move(ball));
}

GreenField::GreenField(std::shared_ptr<const WalkDomain> domain, int trunc)
    : domain_(std::move(domain)), trunc_(trunc) {
  if (trunc_ < 1) throw UsageError("truncation order must be at least 1");
  const auto& ball = domain_->ball();
  const auto n = domain_->size();
  const int R = ball.radius();
  // Nested domain for the boundary-loss estimate.
  const int inner_radius = std::max(0, R - 2);
  const auto m = ball.cardinality(inner_radius);

  std::vector<double> cur(n, 0.0), next(n, 0.0), prev(n, 0.0);
  std::vector<double> inner(m, 0.0), inner_next(m, 0.0), inner_sum(m, 0.0);
  cur[0] = 1.0;
  inner[0] = 1.0;
  lower_ = cur;
  inner_sum = inner;
  returns_.assign(1, 1.0);
  double half_sum = 0.0;

  for (int k = 1; k <= trunc_; ++k) {
    kernels::forward_step(*domain_, cur, next);
    kernels::forward_step(*domain_, inner, inner_next);
    prev.swap(cur);
    cur.swap(next);
    inner.swap(inner_next);
    add_into(lower_, cur);
    add_into(inner_sum, inner);
    returns_.push_back(cur[0]);
    if (k % 2 == 0 && cur[0] > 0.0) rho_hat_ = std::max(rho_hat_, std::pow(cur[0], 1.0 / k));
    if (k == trunc_ / 2) half_sum = lower_[0];
  }
  rho_hat_ = std::min(rho_hat_, 1.0);
  leaked_ = std::max(0.0, 1.0 - kernels::ordered_sum(cur));

  if (rho_hat_ >= kRecurrentRho && lower_[0] > 0 && (lower_[0] - half_sum) / lower_[0] > kRecurrentGrowth) {
    throw RecurrentWalkError("walk looks recurrent: rho_hat = " + std::to_string(rho_hat_) +
                             " and g(e,e) partial sums still grow past order " + std::to_string(trunc_));
  }

  tail_mode_ = domain_->measure().is_symmetric() ? TailMode::geometric_bound : TailMode::heuristic;
  time_tail_.assign(n, kInf);
  if (rho_hat_ > 0.0 && rho_hat_ < 1.0) {
    const double lr = std::log(rho_hat_);
    const double geometric = std::exp((trunc_ + 1) * lr) / (1.0 - rho_hat_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      const double a = cur[i] > 0 ? std::exp(std::log(cur[i]) - trunc_ * lr) : 0.0;
      const double b = prev[i] > 0 ? std::exp(std::log(prev[i]) - (trunc_ - 1) * lr) : 0.0;
      time_tail_[i] = std::max(a, b) * geometric;
    }
  } else if (rho_hat_ == 0.0) {
    time_tail_.assign(n, 0.0);  // killed walk dies before any even return
  }

  space_tail_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) space_tail_[i] = i < m ? std::max(0.0, lower_[i] - inner_sum[i]) : lower_[i];
}

GreenValue GreenField::at(std::size_t index) const {
  GreenValue v;
  v.K = trunc_;
  v.tail_mode = tail_mode_;
  v.lower = lower_.at(index);
  v.upper = v.lower + time_tail_[index] + space_tail_[index];
  return v;
}

GreenValue GreenField::at(std::string_view key) const {
  const auto idx = index_of(key);
  if (!idx) {
    throw TruncationError("element " + domain_->ball().model().describe(key) + " lies outside the Green domain W_" +
                          std::to_string(domain_->radius()));
  }
  return at(*idx);
}

ColumnField ColumnField::compute(const WalkDomain& domain, std::size_t target, int trunc) {
  if (target >= domain.size()) throw UsageError("column target outside the domain");
  if (trunc < 1) throw UsageError("truncation order must be at least 1");
  ColumnField out;
  out.target = target;
  out.trunc = trunc;
  std::vector<double> cur(domain.size(), 0.0), next(domain.size(), 0.0);
  cur[target] = 1.0;
  out.values = cur;
  for (int k = 1; k <= trunc; ++k) {
    kernels::backward_step(domain, cur, next);
    cur.swap(next);
    add_into(out.values, cur);
  }
  out.last_term = std::move(cur);
  return out;
}

Potential::Potential(Measure mu, PotentialOptions options)
    : options_(options),
      domain_([&] {
        if (!options.allow_recurrent && mu.model().transience_excluded()) {
          throw TransienceError("walks on " + mu.model().spec() +
                                " are recurrent (finite, or a finite extension of Z or Z^2)");
        }
        return make_walk_domain(mu, options);
      }()),
      field_(domain_, options.trunc) {}

GreenValue Potential::green(const GroupElement& x, const GroupElement& y) const {
  const auto& m = model();
  m.check(x);
  m.check(y);
  return field_.at(m.multiply(m.invert(x.key), y.key));
}

double Potential::estimate(std::string_view key) const { return field_.at(key).midpoint(); }

MetricValue Potential::green_metric(const GroupElement& x, const GroupElement& y) const {
  const auto gee = field_.at(std::size_t{0});
  const auto gxy = green(x, y);
  if (!(gxy.lower > 0.0)) {
    throw TruncationError("g(" + model().format(x) + ", " + model().format(y) + ") has zero lower bracket at K = " +
                          std::to_string(trunc()));
  }
  MetricValue out;
  out.lower = std::log(gee.lower) - std::log(gxy.upper);
  out.upper = std::log(gee.upper) - std::log(gxy.lower);
  out.value = 0.5 * (out.lower + out.upper);
  out.half_width = 0.5 * (out.upper - out.lower);
  return out;
}

MetricBall Potential::green_ball(double r, int search_radius) const {
  if (!(r > 0.0)) throw UsageError("Green ball radius must be positive");
  const auto& ball = domain_->ball();
  if (search_radius < 1 || search_radius > ball.radius()) {
    throw TruncationError("search radius " + std::to_string(search_radius) + " outside the Green domain W_" +
                          std::to_string(ball.radius()));
  }
  const auto gee = field_.at(std::size_t{0});
  const double ln_lo = std::log(gee.lower), ln_hi = std::log(gee.upper);
  MetricBall out;
  out.r = r;
  out.search_radius = search_radius;
  for (std::size_t i = 0; i < ball.cardinality(search_radius); ++i) {
    const auto v = field_.at(i);
    if (v.lower > 0.0 && ln_hi - std::log(v.lower) <= r) out.members.push_back(i);
  }
  double min_lower = kInf;
  const auto [first, last] = ball.sphere(search_radius);
  for (auto i = first; i < last; ++i) min_lower = std::min(min_lower, ln_lo - std::log(field_.at(i).upper));
  out.complete = min_lower > r;
  return out;
}

KernelValue Potential::martin(const GroupElement& x, const GroupElement& z, const GroupElement& y) const {
  const auto num = green(x, z);
  const auto den = green(y, z);
  if (!(den.lower > 0.0)) {
    throw TruncationError("g(" + model().format(y) + ", " + model().format(z) + ") has zero lower bracket at K = " +
                          std::to_string(trunc()));
  }
  KernelValue out;
  out.value = num.midpoint() / den.midpoint();
  const double rel_num = num.midpoint() > 0 ? num.half_width() / num.midpoint() : kInf;
  out.uncertainty = out.value * (rel_num + den.half_width() / den.midpoint());
  return out;
}

DeviationStat Potential::deviation(std::span<const GroupElement> excluded, const GroupElement& x,
                                   const GroupElement& y, int window) const {
  const auto& ball = domain_->ball();
  if (window < 0 || window > ball.radius()) {
    throw TruncationError("window W_" + std::to_string(window) + " outside the Green domain W_" +
                          std::to_string(ball.radius()));
  }
  std::vector<char> skip(ball.cardinality(window), 0);
  std::size_t count = 0;
  for (const auto& s : excluded) {
    model().check(s);
    const auto idx = ball.index_of(s.key);
    if (idx && *idx < skip.size() && !skip[*idx]) {
      skip[*idx] = 1;
      ++count;
    }
  }
  return deviation_scan(skip, count, x, y, window);
}

DeviationStat Potential::deviation_outside_ball(int n, const GroupElement& x, const GroupElement& y,
                                                int window) const {
  const auto& ball = domain_->ball();
  if (window < 0 || window > ball.radius()) {
    throw TruncationError("window W_" + std::to_string(window) + " outside the Green domain W_" +
                          std::to_string(ball.radius()));
  }
  std::vector<char> skip(ball.cardinality(window), 0);
  const auto cut = n < 0 ? 0 : ball.cardinality(std::min(n, window));
  std::fill(skip.begin(), skip.begin() + static_cast<std::ptrdiff_t>(cut), 1);
  return deviation_scan(skip, cut, x, y, window);
}

DeviationStat Potential::deviation_scan(const std::vector<char>& skip, std::size_t excluded, const GroupElement& x,
                                        const GroupElement& y, int window) const {
  const auto& m = model();
  m.check(x);
  m.check(y);
  const auto& ball = domain_->ball();
  const auto n = skip.size();
  if (excluded >= n) throw UsageError("deviation scan set W_" + std::to_string(window) + " \\ S is empty");

  const auto xinv = m.invert(x.key);
  const auto yinv = m.invert(y.key);
  std::vector<double> values(n, -1.0);
  std::vector<char> failed(n, 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    if (skip[i]) continue;
    const auto& z = ball.key(static_cast<std::size_t>(i));
    const auto ix = field_.index_of(m.multiply(xinv, z));
    const auto iy = field_.index_of(m.multiply(yinv, z));
    if (!ix || !iy) {
      failed[i] = 1;
      continue;
    }
    const double den = field_.at(*iy).midpoint();
    if (!(field_.at(*iy).lower > 0.0)) {
      failed[i] = 1;
      continue;
    }
    values[i] = std::abs(field_.at(*ix).midpoint() / den - 1.0);
  }

  DeviationStat out;
  out.window = window;
  out.excluded = excluded;
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (skip[i]) continue;
    if (failed[i]) {
      throw TruncationError("Martin kernel at z = " + ball.model().describe(ball.key(i)) +
                            " needs Green values outside the domain W_" + std::to_string(ball.radius()) +
                            " or beyond order " + std::to_string(trunc()));
    }
    ++out.scanned;
    if (best == n || values[i] > values[best] || (values[i] == values[best] && ball.key(i) < ball.key(best))) best = i;
  }
  out.value = values[best];
  out.argmax = ball.element(best);
  return out;
}

}  // namespace lv
