#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "liouville/group.hpp"

namespace lv {

inline constexpr std::size_t kDefaultSupportBudget = 5'000'000;

struct Atom {
  Key key;
  double weight = 0.0;
};

/// Finitely supported probability measure on a group model. Atoms are kept
/// sorted by key with strictly positive weights.
class Measure {
 public:
  /// Sorts and merges `atoms`; every weight must be positive and finite.
  /// No renormalisation happens here (see make_measure).
  static Measure from_atoms(ModelPtr model, std::vector<Atom> atoms);

  const GroupModel& model() const noexcept { return *model_; }
  const ModelPtr& model_ptr() const noexcept { return model_; }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t support_size() const noexcept { return atoms_.size(); }

  double mass_at(std::string_view key) const;
  double mass_at(const GroupElement& g) const;
  double total_mass() const;
  /// mu(g) == mu(g^-1) for every g, within `tol`.
  bool is_symmetric(double tol = 1e-12) const;
  /// Largest word length of a support element. Throws UsageError if some
  /// support element is not found within `search_limit`.
  int support_radius(int search_limit = 64) const;

 private:
  Measure(ModelPtr model, std::vector<Atom> atoms) : model_(std::move(model)), atoms_(std::move(atoms)) {}

  ModelPtr model_;
  std::vector<Atom> atoms_;
};

/// Normalised measure from weighted elements; zero weights are dropped.
Measure make_measure(ModelPtr model, std::span<const std::pair<GroupElement, double>> pairs);
Measure dirac(const ModelPtr& model, const GroupElement& x);
/// Uniform on the declared generators.
Measure simple_random_walk(const ModelPtr& model);
/// Mass p at the identity, the rest uniform on the generators.
Measure lazy_walk(const ModelPtr& model, double p);
/// CSV with rows `word,weight`.
Measure load_measure_csv(const ModelPtr& model, const std::filesystem::path& path);
/// "srw", "lazy:<p>", or a path to a `word,weight` CSV file.
Measure parse_measure_spec(const ModelPtr& model, std::string_view spec);

/// mu_x(y) = mu(x^-1 y).
Measure translate(const Measure& mu, const GroupElement& x);

/// (mu * nu)(z) = sum_y mu(y) nu(y^-1 z). The left factor is split into
/// fixed-size chunks that may run in parallel; chunk partials are merged in
/// chunk order after a stable sort by key, so the result does not depend on
/// the thread count. Throws ResourceError past `budget` support entries.
Measure convolve(const Measure& mu, const Measure& nu, std::size_t budget = kDefaultSupportBudget);
/// Single-threaded reference: one accumulator, left atoms in key order.
Measure convolve_serial(const Measure& mu, const Measure& nu, std::size_t budget = kDefaultSupportBudget);

struct ConvolutionPower {
  Measure base;
  int k = 0;
  Measure result;

  /// mu_x^k(y) = mu^k(x^-1 y).
  double mass_at(const GroupElement& x, const GroupElement& y) const;
};

/// mu^k by iterated left-to-right convolution; mu^0 is the Dirac mass at e.
/// On budget exhaustion the ResourceError carries the largest k reached.
ConvolutionPower power(const Measure& mu, int k, std::size_t budget = kDefaultSupportBudget);

struct DegeneracyVerdict {
  bool nondegenerate = false;
  int radius = 0;
  std::size_t uncovered = 0;
  std::optional<GroupElement> first_uncovered;  // in ball enumeration order
};

/// Checks that the semigroup generated by supp(mu) covers W_R. Products are
/// explored inside W_{R + 2L}, L the support radius, so the verdict is a
/// statement about radius R only.
DegeneracyVerdict nondegenerate(const Measure& mu, int radius);

struct SpectralEstimate {
  double rho_hat = 0.0;
  int kmax = 0;
  std::vector<double> return_probability;  // mu^k(e), k = 0..kmax
};

/// rho_hat = max over even k <= kmax of mu^k(e)^(1/k), for symmetric mu.
/// Return probabilities are exact: walks that come back within kmax steps
/// never leave W_{ceil(kmax/2) L}.
SpectralEstimate spectral_radius(const Measure& mu, int kmax);

}  // namespace lv
