#include "liouville/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <utility>
#include <map>
#include <string>

#include "liouville/errors.hpp"
#include "liouville/walk_domain.hpp"
#include "liouville/word_ball.hpp"

namespace lv {

namespace {

bool key_less(const Atom& a, const Atom& b) { return a.key < b.key; }

// Sums runs of equal keys in the given order. Input must be stably sorted.
std::vector<Atom> merge_sorted(std::vector<Atom> atoms) {
  std::vector<Atom> out;
  for (auto& a : atoms) {
    if (!out.empty() && out.back().key == a.key)
      out.back().weight += a.weight;
    else
      out.push_back(std::move(a));
  }
  std::erase_if(out, [](const Atom& a) { return !(a.weight > 0.0); });
  return out;
}

void same_model(const Measure& mu, const Measure& nu) {
  if (mu.model().id() != nu.model().id()) throw UsageError("measures live on different group models");
}

void check_pair_budget(std::size_t pairs, std::size_t budget, const Measure& mu) {
  // Pre-merge products may repeat heavily; allow a constant factor over the support budget.
  if (pairs / 8 > budget) {
    throw ResourceError("convolution needs " + std::to_string(pairs) + " products, over the budget for " +
                            mu.model().spec(),
                        0);
  }
}

void check_support_budget(std::size_t size, std::size_t budget, const Measure& mu) {
  if (size > budget) {
    throw ResourceError("convolution support of " + std::to_string(size) + " exceeds budget " +
                            std::to_string(budget) + " on " + mu.model().spec(),
                        0);
  }
}

double parse_double(std::string_view s, const std::string& what) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw UsageError("cannot read number '" + std::string(s) + "' in " + what);
  return v;
}

}  // namespace

Measure Measure::from_atoms(ModelPtr model, std::vector<Atom> atoms) {
  if (!model) throw UsageError("measure needs a group model");
  for (const auto& a : atoms) {
    if (!std::isfinite(a.weight) || a.weight <= 0.0) throw UsageError("measure weights must be positive and finite");
  }
  std::stable_sort(atoms.begin(), atoms.end(), key_less);
  return Measure(std::move(model), merge_sorted(std::move(atoms)));
}

double Measure::mass_at(std::string_view key) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), key,
                             [](const Atom& a, std::string_view k) { return std::string_view(a.key) < k; });
  return it != atoms_.end() && it->key == key ? it->weight : 0.0;
}

double Measure::mass_at(const GroupElement& g) const {
  model_->check(g);
  return mass_at(std::string_view(g.key));
}

double Measure::total_mass() const {
  double total = 0.0;
  for (const auto& a : atoms_) total += a.weight;
  return total;
}

bool Measure::is_symmetric(double tol) const {
  for (const auto& a : atoms_) {
    if (std::abs(mass_at(std::string_view(model_->invert(a.key))) - a.weight) > tol) return false;
  }
  return true;
}

int Measure::support_radius(int search_limit) const {
  const auto identity = model_->identity_key();
  bool trivial = true;
  int radius = 0;
  for (const auto& a : atoms_) {
    if (a.key == identity) continue;
    radius = 1;
    const auto& gens = model_->generators();
    trivial = trivial && std::any_of(gens.begin(), gens.end(), [&](const Generator& g) { return g.key == a.key; });
  }
  if (trivial) return radius;

  for (int r = 2; r <= search_limit; ++r) {
    const auto ball = WordBall::enumerate(model_, r);
    bool all = true;
    int longest = 0;
    for (const auto& a : atoms_) {
      const auto idx = ball.index_of(a.key);
      if (!idx) {
        all = false;
        break;
      }
      longest = std::max(longest, ball.length_of(*idx));
    }
    if (all) return longest;
  }
  throw UsageError("support of measure not found within word radius " + std::to_string(search_limit));
}

Measure make_measure(ModelPtr model, std::span<const std::pair<GroupElement, double>> pairs) {
  if (!model) throw UsageError("measure needs a group model");
  std::vector<Atom> atoms;
  double total = 0.0;
  for (const auto& [g, w] : pairs) {
    model->check(g);
    if (!std::isfinite(w) || w < 0.0) throw UsageError("measure weights must be non-negative and finite");
    if (w == 0.0) continue;
    atoms.push_back({g.key, w});
    total += w;
  }
  if (atoms.empty()) throw UsageError("measure has no positive weight");
  for (auto& a : atoms) a.weight /= total;
  return Measure::from_atoms(std::move(model), std::move(atoms));
}

Measure dirac(const ModelPtr& model, const GroupElement& x) {
  model->check(x);
  return Measure::from_atoms(model, {{x.key, 1.0}});
}

Measure simple_random_walk(const ModelPtr& model) {
  std::vector<std::pair<GroupElement, double>> pairs;
  for (std::size_t i = 0; i < model->generators().size(); ++i) pairs.emplace_back(model->generator(i), 1.0);
  if (pairs.empty()) throw UsageError("model has no generators");
  return make_measure(model, pairs);
}

Measure lazy_walk(const ModelPtr& model, double p) {
  if (!(p >= 0.0 && p < 1.0)) throw UsageError("lazy walk needs 0 <= p < 1");
  const auto n = static_cast<double>(model->generators().size());
  std::vector<std::pair<GroupElement, double>> pairs;
  pairs.emplace_back(model->identity(), p);
  for (std::size_t i = 0; i < model->generators().size(); ++i) pairs.emplace_back(model->generator(i), (1.0 - p) / n);
  return make_measure(model, pairs);
}

Measure load_measure_csv(const ModelPtr& model, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open measure file " + path.string());
  std::vector<std::pair<GroupElement, double>> pairs;
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const bool header_allowed = std::exchange(first, false);
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected word,weight");
    const auto word = std::string_view(line).substr(0, comma);
    const auto weight = std::string_view(line).substr(comma + 1);
    if (header_allowed && word == "word") continue;
    pairs.emplace_back(model->parse(word), parse_double(weight, path.string()));
  }
  return make_measure(model, pairs);
}

Measure parse_measure_spec(const ModelPtr& model, std::string_view spec) {
  if (spec == "srw") return simple_random_walk(model);
  if (spec.starts_with("lazy:")) return lazy_walk(model, parse_double(spec.substr(5), "lazy measure spec"));
  return load_measure_csv(model, std::filesystem::path(std::string(spec)));
}

Measure translate(const Measure& mu, const GroupElement& x) {
  const auto& model = mu.model();
  model.check(x);
  std::vector<Atom> atoms;
  atoms.reserve(mu.support_size());
  for (const auto& a : mu.atoms()) atoms.push_back({model.multiply(x.key, a.key), a.weight});
  return Measure::from_atoms(mu.model_ptr(), std::move(atoms));
}

Measure convolve(const Measure& mu, const Measure& nu, std::size_t budget) {
  same_model(mu, nu);
  const auto& model = mu.model();
  const auto left = mu.atoms();
  const auto right = nu.atoms();
  check_pair_budget(left.size() * right.size(), budget, mu);

  constexpr std::size_t chunk = 256;
  const auto chunks = (left.size() + chunk - 1) / chunk;
  std::vector<std::vector<Atom>> partial(chunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const auto first = static_cast<std::size_t>(c) * chunk;
    const auto last = std::min(left.size(), first + chunk);
    auto& out = partial[static_cast<std::size_t>(c)];
    out.reserve((last - first) * right.size());
    for (std::size_t i = first; i < last; ++i)
      for (const auto& b : right) out.push_back({model.multiply(left[i].key, b.key), left[i].weight * b.weight});
  }

  std::vector<Atom> all;
  all.reserve(left.size() * right.size());
  for (auto& p : partial) std::move(p.begin(), p.end(), std::back_inserter(all));
  std::stable_sort(all.begin(), all.end(), key_less);
  auto merged = merge_sorted(std::move(all));
  check_support_budget(merged.size(), budget, mu);
  return Measure::from_atoms(mu.model_ptr(), std::move(merged));
}

Measure convolve_serial(const Measure& mu, const Measure& nu, std::size_t budget) {
  same_model(mu, nu);
  const auto& model = mu.model();
  check_pair_budget(mu.support_size() * nu.support_size(), budget, mu);
  std::map<Key, double> acc;
  for (const auto& a : mu.atoms())
    for (const auto& b : nu.atoms()) acc[model.multiply(a.key, b.key)] += a.weight * b.weight;
  check_support_budget(acc.size(), budget, mu);
  std::vector<Atom> atoms;
  for (auto& [k, w] : acc)
    if (w > 0.0) atoms.push_back({k, w});
  return Measure::from_atoms(mu.model_ptr(), std::move(atoms));
}

double ConvolutionPower::mass_at(const GroupElement& x, const GroupElement& y) const {
  const auto& model = base.model();
  return result.mass_at(model.mul(model.inv(x), y));
}

ConvolutionPower power(const Measure& mu, int k, std::size_t budget) {
  if (k < 0) throw UsageError("convolution power needs k >= 0");
  auto acc = dirac(mu.model_ptr(), mu.model().identity());
  for (int i = 1; i <= k; ++i) {
    try {
      acc = convolve(acc, mu, budget);
    } catch (const ResourceError& e) {
      throw ResourceError(std::string(e.what()) + " (reached k = " + std::to_string(i - 1) + ")", i - 1);
    }
  }
  return ConvolutionPower{mu, k, std::move(acc)};
}

DegeneracyVerdict nondegenerate(const Measure& mu, int radius) {
  if (radius < 1) throw UsageError("non-degeneracy check needs R >= 1");
  const auto& model = mu.model();
  const int L = std::max(1, mu.support_radius());
  const auto ball = WordBall::enumerate(mu.model_ptr(), radius + 2 * L);

  std::vector<char> reached(ball.size(), 0);
  std::vector<std::size_t> frontier;
  for (const auto& a : mu.atoms()) {
    const auto idx = ball.index_of(a.key);
    if (idx && !reached[*idx]) {
      reached[*idx] = 1;
      frontier.push_back(*idx);
    }
  }
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (auto i : frontier) {
      for (const auto& a : mu.atoms()) {
        const auto idx = ball.index_of(model.multiply(ball.key(i), a.key));
        if (idx && !reached[*idx]) {
          reached[*idx] = 1;
          next.push_back(*idx);
        }
      }
    }
    frontier = std::move(next);
  }

  DegeneracyVerdict out;
  out.radius = radius;
  for (std::size_t i = 0; i < ball.cardinality(radius); ++i) {
    if (reached[i]) continue;
    if (out.uncovered++ == 0) out.first_uncovered = ball.element(i);
  }
  out.nondegenerate = out.uncovered == 0;
  return out;
}

SpectralEstimate spectral_radius(const Measure& mu, int kmax) {
  if (kmax < 4) throw UsageError("spectral radius estimate needs kmax >= 4");
  if (!mu.is_symmetric(1e-12)) throw UsageError("spectral radius estimate needs a symmetric measure");
  const int L = std::max(1, mu.support_radius());
  auto ball = std::make_shared<const WordBall>(WordBall::enumerate(mu.model_ptr(), ((kmax + 1) / 2) * L));
  const WalkDomain domain(mu, ball);

  std::vector<double> cur(domain.size(), 0.0), next(domain.size(), 0.0);
  cur[0] = 1.0;
  SpectralEstimate out;
  out.kmax = kmax;
  out.return_probability.push_back(1.0);
  for (int k = 1; k <= kmax; ++k) {
    kernels::forward_step(domain, cur, next);
    std::swap(cur, next);
    out.return_probability.push_back(cur[0]);
    if (k % 2 == 0 && cur[0] > 0.0) out.rho_hat = std::max(out.rho_hat, std::pow(cur[0], 1.0 / k));
  }
  out.rho_hat = std::min(out.rho_hat, 1.0);
  return out;
}

}  // namespace lv
