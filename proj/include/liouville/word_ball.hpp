#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "liouville/group.hpp"

namespace lv {

inline constexpr std::size_t kDefaultElementBudget = 10'000'000;

/// Exact enumeration of the word ball W_n with its sphere decomposition.
///
/// Elements are stored in breadth-first order: generators are tried in their
/// declared order and the frontier is expanded first-in first-out, so the
/// enumeration is reproducible bit for bit. Element i of the ball has word
/// length `length_of(i)`, and `neighbor(i, j)` is the index of
/// element_i * generator_j, or -1 when that product lies outside the ball.
class WordBall {
 public:
  /// Enumerates W_n. Throws ResourceError (partial = last complete radius)
  /// when the ball would exceed `budget` elements.
  static WordBall enumerate(ModelPtr model, int radius, std::size_t budget = kDefaultElementBudget);

  /// Largest ball whose size stays within `budget`, capped at `max_radius`.
  /// Growth of the next sphere is predicted from the last two so the
  /// overshooting sphere is usually never materialised.
  static WordBall within_budget(ModelPtr model, std::size_t budget, int max_radius);

  WordBall(WordBall&&) = default;
  WordBall& operator=(WordBall&&) = default;
  WordBall(const WordBall&) = delete;
  WordBall& operator=(const WordBall&) = delete;

  const GroupModel& model() const noexcept { return *model_; }
  const ModelPtr& model_ptr() const noexcept { return model_; }
  int radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return order_.size(); }

  /// |W_n| for 0 <= n <= radius.
  std::size_t cardinality(int n) const;
  /// |dW_n| = |W_n \ W_{n-1}|.
  std::size_t sphere_size(int n) const;
  /// Index range [first, last) of the sphere of radius n.
  std::pair<std::size_t, std::size_t> sphere(int n) const;

  const Key& key(std::size_t i) const { return *order_[i]; }
  GroupElement element(std::size_t i) const { return model_->wrap(key(i)); }
  int length_of(std::size_t i) const;
  std::optional<std::size_t> index_of(std::string_view key) const;
  bool contains(std::string_view key) const { return index_of(key).has_value(); }

  std::size_t generator_count() const noexcept { return generator_count_; }
  std::int32_t neighbor(std::size_t i, std::size_t gen) const { return adjacency_[i * generator_count_ + gen]; }
  std::span<const std::int32_t> adjacency() const noexcept { return adjacency_; }

 private:
  struct ViewHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
  };
  struct ViewEq {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const noexcept { return a == b; }
  };

  explicit WordBall(ModelPtr model);
  // Computes products for the outermost sphere. With `grow` new elements are
  // appended as the next sphere; without it only adjacency is filled in.
  void expand(bool grow, std::size_t budget);

  ModelPtr model_;
  int radius_ = 0;
  std::size_t generator_count_ = 0;
  std::unordered_map<Key, std::uint32_t, ViewHash, ViewEq> index_;
  std::vector<const Key*> order_;
  std::vector<std::size_t> sphere_offsets_;  // sphere n occupies [offsets[n], offsets[n+1])
  std::vector<std::int32_t> adjacency_;
};

struct GrowthEstimate {
  double rate = 0.0;                 // least-squares slope of ln|W_n| on the tail half
  std::vector<double> normalized;    // (1/n) ln|W_n| for n = 1..N (index n-1)
  std::vector<std::size_t> sizes;    // |W_n| for n = 0..N
  int first_fitted = 0;              // smallest radius used by the fit
};

/// Word-growth estimate from ball cardinalities |W_0|, ..., |W_N|. Needs at
/// least three consecutive radii.
GrowthEstimate growth_rate(std::span<const std::size_t> ball_sizes);
GrowthEstimate growth_rate(const WordBall& ball);

}  // namespace lv
