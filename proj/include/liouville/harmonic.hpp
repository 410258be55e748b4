#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "liouville/measure.hpp"
#include "liouville/potential.hpp"
#include "liouville/word_ball.hpp"

namespace lv {

/// A real function on the word ball W_N, indexed like the ball.
struct WindowFunction {
  std::shared_ptr<const WordBall> window;
  std::vector<double> values;

  int radius() const { return window->radius(); }
  double at(std::string_view key) const;
};

/// Restricts a function of the element to W_N.
WindowFunction make_window_function(ModelPtr model, int radius, const std::function<double(const GroupElement&)>& f);

/// |f(x) - sum_s mu(s) f(xs)|. Throws UsageError listing the products x s
/// that fall outside the window.
double harmonic_residual(const WindowFunction& f, const GroupElement& x, const Measure& mu);

struct MartinLimit {
  WindowFunction candidate;                 // values at the last term of zseq
  std::vector<std::vector<double>> terms;   // K_y(., z_n) on the window, one row per z_n
  std::vector<double> cauchy_delta;         // per window point, over the last three terms
  double max_cauchy_delta = 0.0;
  double max_tail_residual = 0.0;           // largest p_{K}(x, z)/g(y, z) over the window
  bool diverging = false;
  int domain_radius = 0;
  int trunc = 0;
};

/// Evaluates x -> K_y(x, z_n) on W_window for each term of `zseq` using
/// column fields on one fixed killed domain, so every candidate is harmonic
/// for the killed chain off z_n up to the truncation term.
MartinLimit martin_limit(const Measure& mu, std::span<const GroupElement> zseq, const GroupElement& y, int window,
                         const PotentialOptions& options);

/// True iff word lengths strictly increase and no element repeats. Lengths
/// come from `ball`, which must contain every term.
bool is_diverging(const WordBall& ball, std::span<const GroupElement> zseq);

struct Classification {
  bool positive = false;
  bool nonconstant = false;
  double ratio = 0.0;  // max/min over the window
  double max_residual = 0.0;
  std::size_t interior = 0;
  GroupElement worst;  // interior point with the largest residual
};

/// Residuals are taken at interior points, those x with x supp(mu) inside
/// the window.
Classification classify(const WindowFunction& candidate, const Measure& mu, double tol = 1e-6);

enum class Verdict { consistent_with_liouville, obstruction_witnessed, inconclusive };
std::string to_string(Verdict v);

struct ContainmentRow {
  int n = 0;
  double radius = 0.0;       // r(n)
  double max_distance = 0.0; // max over dW_n of d_g(e, x)
  bool holds = false;
};

struct ObstructionReport {
  int n0 = 0;
  int window = 0;
  int trunc = 0;
  int domain_radius = 0;
  double delta_hat = 0.0;          // at `window`
  double delta_hat_wide = 0.0;     // at `window + 2`
  GroupElement delta_generator;    // h attaining delta_hat
  GroupElement delta_witness;      // z attaining delta_hat
  double c_hat = 0.0;
  GroupElement c_generator;
  GroupElement c_witness;
  double growth_word = 0.0;
  int growth_radius = 0;
  double bound_rate = 0.0;         // +inf when delta_hat >= 1
  double margin = 0.05;
  std::vector<ContainmentRow> containment;  // empty when delta_hat >= 1
  std::size_t containment_violations = 0;
  Verdict verdict = Verdict::inconclusive;
  std::string reason;

  /// -(n - n0) ln(1 - delta_hat) - n0 ln c_hat.
  double r_of(int n) const;
};

struct ObstructionOptions {
  int n0 = 3;
  int window = 7;
  PotentialOptions potential;
  /// Word ball radius cap and element budget for the growth estimate.
  int growth_radius = 60;
  std::size_t growth_budget = 200'000;
  double margin = 0.05;
  /// Largest allowed |delta_hat(window + 2) - delta_hat(window)| for a verdict.
  double stability = 0.05;
};

ObstructionReport obstruction_report(const Measure& mu, const ObstructionOptions& options);

struct ProductIdentity {
  double residual = 0.0;   // relative gap
  double direct = 0.0;     // g(e, x)
  double telescoped = 0.0; // g(e,e) prod_i K_{h_{i+1}}(e, x_i^-1 x)
};

/// Checks g(e,x) = g(e,e) prod_{i<n} K_{h_{i+1}}(e, x_i^-1 x) for the word
/// x = h_1...h_n given as generator indices.
ProductIdentity product_identity_check(const Potential& potential, std::span<const std::size_t> word);

}  // namespace lv
