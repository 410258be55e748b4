#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liouville/measure.hpp"
#include "liouville/walk_domain.hpp"
#include "liouville/word_ball.hpp"

namespace lv {

enum class TailMode { geometric_bound, heuristic };

std::string to_string(TailMode mode);

/// Bracketed Green value. `lower` is the partial sum of return masses over
/// paths of at most K steps that stay inside the computation domain, so it
/// never exceeds the true value. `upper` adds the time tail and an estimate
/// of the mass lost at the domain boundary.
struct GreenValue {
  double lower = 0.0;
  double upper = 0.0;
  int K = 0;
  TailMode tail_mode = TailMode::heuristic;

  double midpoint() const noexcept { return 0.5 * (lower + upper); }
  double half_width() const noexcept { return 0.5 * (upper - lower); }
};

struct PotentialOptions {
  int trunc = 200;
  /// Largest word ball used as computation domain.
  std::size_t domain_budget = 1'500'000;
  /// Fixed domain radius; 0 picks the largest ball within the budget.
  int domain_radius = 0;
  /// Skip the structural transience gate.
  bool allow_recurrent = false;
};

/// Builds the killed-walk domain W_R for `mu`. Automatic radii are capped at
/// trunc * L, beyond which no path of the truncated series can travel.
std::shared_ptr<const WalkDomain> make_walk_domain(const Measure& mu, const PotentialOptions& options,
                                                   int min_radius = 0);

/// g(e, .) on a walk domain, from the forward iteration of the killed walk.
class GreenField {
 public:
  GreenField(std::shared_ptr<const WalkDomain> domain, int trunc);

  const WalkDomain& domain() const noexcept { return *domain_; }
  int trunc() const noexcept { return trunc_; }
  double rho_hat() const noexcept { return rho_hat_; }
  TailMode tail_mode() const noexcept { return tail_mode_; }
  /// Killed return masses p_k(e), k = 0..trunc.
  const std::vector<double>& return_probability() const noexcept { return returns_; }
  /// Mass that left the domain within trunc steps.
  double leaked_mass() const noexcept { return leaked_; }

  GreenValue at(std::size_t index) const;
  /// Throws TruncationError when `key` is outside the domain.
  GreenValue at(std::string_view key) const;
  std::optional<std::size_t> index_of(std::string_view key) const { return domain_->ball().index_of(key); }

 private:
  std::shared_ptr<const WalkDomain> domain_;
  int trunc_;
  double rho_hat_ = 0.0;
  double leaked_ = 0.0;
  TailMode tail_mode_ = TailMode::heuristic;
  std::vector<double> returns_;
  std::vector<double> lower_;
  std::vector<double> time_tail_;
  std::vector<double> space_tail_;
};

/// x -> g_D(x, z) for a fixed target z on the domain, from the backward
/// iteration. On the killed chain it is harmonic off z up to the K+1 term.
struct ColumnField {
  std::size_t target = 0;
  int trunc = 0;
  std::vector<double> values;
  std::vector<double> last_term;  // p^D_K(x, z)

  static ColumnField compute(const WalkDomain& domain, std::size_t target, int trunc);
};

struct MetricValue {
  double value = 0.0;
  double half_width = 0.0;
  double lower = 0.0;  // ln g(e,e)_lo - ln g(x,y)_hi
  double upper = 0.0;  // ln g(e,e)_hi - ln g(x,y)_lo
};

struct MetricBall {
  double r = 0.0;
  int search_radius = 0;
  bool complete = false;
  std::vector<std::size_t> members;  // domain indices, enumeration order
  std::size_t count() const noexcept { return members.size(); }
};

struct KernelValue {
  double value = 0.0;
  double uncertainty = 0.0;
};

struct DeviationStat {
  double value = 0.0;
  int window = 0;
  std::size_t excluded = 0;
  std::size_t scanned = 0;
  GroupElement argmax;
};

/// Green function, Green metric, Martin kernels and deviation statistics for
/// one measure at one truncation order. Everything is evaluated through
/// left-invariance from a single field g(e, .).
class Potential {
 public:
  Potential(Measure mu, PotentialOptions options = {});

  const Measure& measure() const noexcept { return domain_->measure(); }
  const GroupModel& model() const noexcept { return domain_->ball().model(); }
  const WalkDomain& domain() const noexcept { return *domain_; }
  const std::shared_ptr<const WalkDomain>& domain_ptr() const noexcept { return domain_; }
  const GreenField& field() const noexcept { return field_; }
  const PotentialOptions& options() const noexcept { return options_; }
  int trunc() const noexcept { return options_.trunc; }

  GreenValue green(const GroupElement& x, const GroupElement& y) const;
  /// Throws TruncationError when g(x,y) has a zero lower bracket.
  MetricValue green_metric(const GroupElement& x, const GroupElement& y) const;
  MetricBall green_ball(double r, int search_radius) const;
  /// K_y(x,z) = g(x,z)/g(y,z).
  KernelValue martin(const GroupElement& x, const GroupElement& z, const GroupElement& y) const;

  /// sup over z in W_N \ S of |K_y(x,z) - 1|.
  DeviationStat deviation(std::span<const GroupElement> excluded, const GroupElement& x, const GroupElement& y,
                          int window) const;
  /// Same with S = W_n.
  DeviationStat deviation_outside_ball(int n, const GroupElement& x, const GroupElement& y, int window) const;

  /// Point estimate of g(e, .) at a domain index and its key lookup.
  double estimate(std::size_t index) const { return field_.at(index).midpoint(); }
  double estimate(std::string_view key) const;

 private:
  DeviationStat deviation_scan(const std::vector<char>& skip, std::size_t excluded, const GroupElement& x,
                               const GroupElement& y, int window) const;

  PotentialOptions options_;
  std::shared_ptr<const WalkDomain> domain_;
  GreenField field_;
};

}  // namespace lv
