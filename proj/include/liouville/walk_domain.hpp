#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "liouville/measure.hpp"
#include "liouville/word_ball.hpp"

namespace lv {

/// A word ball W_R indexed for the mu-walk killed on leaving it.
///
/// For support atom s_j with weight w_j, `successor(i, j)` is the index of
/// x_i s_j and `predecessor(i, j)` the index of x_i s_j^-1 (-1 outside the
/// ball). Forward steps push a distribution one step along the walk,
/// backward steps apply the transition operator to a function.
class WalkDomain {
 public:
  WalkDomain(Measure mu, std::shared_ptr<const WordBall> ball);

  const Measure& measure() const noexcept { return mu_; }
  const WordBall& ball() const noexcept { return *ball_; }
  const std::shared_ptr<const WordBall>& ball_ptr() const noexcept { return ball_; }
  int radius() const noexcept { return ball_->radius(); }
  std::size_t size() const noexcept { return ball_->size(); }
  std::size_t width() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }

  std::int32_t successor(std::size_t i, std::size_t j) const { return successors_[i * width() + j]; }
  std::int32_t predecessor(std::size_t i, std::size_t j) const { return predecessors_[i * width() + j]; }
  std::span<const std::int32_t> successors() const noexcept { return successors_; }
  std::span<const std::int32_t> predecessors() const noexcept { return predecessors_; }

 private:
  Measure mu_;
  std::shared_ptr<const WordBall> ball_;
  std::vector<double> weights_;
  std::vector<std::int32_t> successors_;
  std::vector<std::int32_t> predecessors_;
};

namespace kernels {

// `in` and `out` may be shorter than the domain. Since balls are stored in
// breadth-first order, a prefix of length |W_r| is the ball W_r itself, and
// indices past the prefix count as outside.

/// out(z) = sum_j w_j in(z s_j^-1), sources outside the domain contribute 0.
void forward_step(const WalkDomain& domain, std::span<const double> in, std::span<double> out);
void forward_step_serial(const WalkDomain& domain, std::span<const double> in, std::span<double> out);

/// out(x) = sum_j w_j in(x s_j), targets outside the domain contribute 0.
void backward_step(const WalkDomain& domain, std::span<const double> in, std::span<double> out);
void backward_step_serial(const WalkDomain& domain, std::span<const double> in, std::span<double> out);

/// Sum with a fixed chunked association order, independent of threads.
double ordered_sum(std::span<const double> values);

}  // namespace kernels

}  // namespace lv
