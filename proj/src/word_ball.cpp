#include "liouville/word_ball.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liouville/errors.hpp"

namespace lv {

WordBall::WordBall(ModelPtr model) : model_(std::move(model)) {
  if (!model_) throw UsageError("word ball needs a group model");
  generator_count_ = model_->generators().size();
  auto [it, inserted] = index_.emplace(model_->identity_key(), 0u);
  order_.push_back(&it->first);
  sphere_offsets_ = {0, 1};
}

void WordBall::expand(bool grow, std::size_t budget) {
  const auto first = sphere_offsets_[radius_];
  const auto last = sphere_offsets_[radius_ + 1];
  const auto count = last - first;
  const auto& gens = model_->generators();

  // Products are independent; only the merge below touches shared state.
  std::vector<Key> products(count * generator_count_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    const auto& k = key(first + static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < generator_count_; ++j)
      products[static_cast<std::size_t>(i) * generator_count_ + j] = model_->multiply(k, gens[j].key);
  }

  adjacency_.resize(last * generator_count_, -1);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < generator_count_; ++j) {
      auto& product = products[i * generator_count_ + j];
      auto found = index_.find(std::string_view(product));
      std::int32_t target = -1;
      if (found != index_.end()) {
        target = static_cast<std::int32_t>(found->second);
      } else if (grow) {
        if (order_.size() >= budget) {
          throw ResourceError("element budget of " + std::to_string(budget) + " exceeded while enumerating radius " +
                                  std::to_string(radius_ + 1) + " for " + model_->spec(),
                              radius_);
        }
        const auto idx = static_cast<std::uint32_t>(order_.size());
        auto [it, inserted] = index_.emplace(std::move(product), idx);
        order_.push_back(&it->first);
        target = static_cast<std::int32_t>(idx);
      }
      adjacency_[(first + i) * generator_count_ + j] = target;
    }
  }
  if (grow) {
    sphere_offsets_.push_back(order_.size());
    ++radius_;
  }
}

WordBall WordBall::enumerate(ModelPtr model, int radius, std::size_t budget) {
  if (radius < 0) throw UsageError("word ball radius must be non-negative");
  WordBall ball(std::move(model));
  for (int r = 0; r < radius; ++r) ball.expand(true, budget);
  ball.expand(false, budget);
  return ball;
}

WordBall WordBall::within_budget(ModelPtr model, std::size_t budget, int max_radius) {
  if (budget < 1) throw UsageError("ball budget must be positive");
  WordBall ball(std::move(model));
  while (ball.radius_ < max_radius) {
    const auto size = ball.size();
    const auto s1 = static_cast<double>(ball.sphere_size(ball.radius_));
    const double s0 = ball.radius_ > 0 ? static_cast<double>(ball.sphere_size(ball.radius_ - 1)) : 1.0;
    const double predicted = s1 * std::max(1.0, s1 / std::max(s0, 1.0));
    if (static_cast<double>(size) + predicted > static_cast<double>(budget)) break;
    if (s1 == 0) break;  // finite group exhausted
    try {
      ball.expand(true, budget);
    } catch (const ResourceError&) {
      // The prediction undershot; drop the partial sphere and stop here.
      const auto keep = ball.sphere_offsets_[ball.radius_ + 1];
      for (std::size_t i = keep; i < ball.order_.size(); ++i) ball.index_.erase(*ball.order_[i]);
      ball.order_.resize(keep);
      ball.adjacency_.resize(ball.sphere_offsets_[ball.radius_] * ball.generator_count_);
      break;
    }
  }
  ball.expand(false, budget);
  return ball;
}

std::size_t WordBall::cardinality(int n) const {
  if (n < 0 || n > radius_) throw UsageError("radius outside enumerated ball");
  return sphere_offsets_[n + 1];
}

std::size_t WordBall::sphere_size(int n) const {
  if (n < 0 || n > radius_) throw UsageError("radius outside enumerated ball");
  return sphere_offsets_[n + 1] - sphere_offsets_[n];
}

std::pair<std::size_t, std::size_t> WordBall::sphere(int n) const {
  if (n < 0 || n > radius_) throw UsageError("radius outside enumerated ball");
  return {sphere_offsets_[n], sphere_offsets_[n + 1]};
}

int WordBall::length_of(std::size_t i) const {
  auto it = std::upper_bound(sphere_offsets_.begin(), sphere_offsets_.end(), i);
  return static_cast<int>(it - sphere_offsets_.begin()) - 1;
}

std::optional<std::size_t> WordBall::index_of(std::string_view key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

GrowthEstimate growth_rate(std::span<const std::size_t> sizes) {
  if (sizes.size() < 3) throw UsageError("growth rate needs at least three consecutive radii");
  GrowthEstimate out;
  out.sizes.assign(sizes.begin(), sizes.end());
  const int N = static_cast<int>(sizes.size()) - 1;
  for (int n = 1; n <= N; ++n) out.normalized.push_back(std::log(static_cast<double>(sizes[n])) / n);

  out.first_fitted = N / 2;
  if (N - out.first_fitted < 1) out.first_fitted = N - 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int n = out.first_fitted; n <= N; ++n) {
    const double x = n, y = std::log(static_cast<double>(sizes[n]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  const double denom = m * sxx - sx * sx;
  out.rate = denom > 0 ? (m * sxy - sx * sy) / denom : 0.0;
  if (std::abs(out.rate) < 1e-15) out.rate = 0.0;
  return out;
}

GrowthEstimate growth_rate(const WordBall& ball) {
  std::vector<std::size_t> sizes;
  for (int n = 0; n <= ball.radius(); ++n) sizes.push_back(ball.cardinality(n));
  return growth_rate(sizes);
}

}  // namespace lv
