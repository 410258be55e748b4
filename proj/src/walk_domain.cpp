#include "liouville/walk_domain.hpp"

#include <algorithm>

#include "liouville/errors.hpp"

namespace lv {

WalkDomain::WalkDomain(Measure mu, std::shared_ptr<const WordBall> ball) : mu_(std::move(mu)), ball_(std::move(ball)) {
  if (!ball_) throw UsageError("walk domain needs a word ball");
  if (mu_.model().id() != ball_->model().id()) throw UsageError("measure and ball live on different models");

  const auto& model = ball_->model();
  const auto& gens = model.generators();
  const auto identity = model.identity_key();
  const auto n = ball_->size();
  const auto m = mu_.support_size();
  for (const auto& atom : mu_.atoms()) weights_.push_back(atom.weight);
  successors_.assign(n * m, -1);
  predecessors_.assign(n * m, -1);

  for (std::size_t j = 0; j < m; ++j) {
    const auto& s = mu_.atoms()[j].key;
    const auto gen = std::find_if(gens.begin(), gens.end(), [&](const Generator& g) { return g.key == s; });
    if (s == identity) {
      for (std::size_t i = 0; i < n; ++i) {
        successors_[i * m + j] = static_cast<std::int32_t>(i);
        predecessors_[i * m + j] = static_cast<std::int32_t>(i);
      }
    } else if (gen != gens.end()) {
      const auto g = static_cast<std::size_t>(gen - gens.begin());
      for (std::size_t i = 0; i < n; ++i) {
        successors_[i * m + j] = ball_->neighbor(i, g);
        predecessors_[i * m + j] = ball_->neighbor(i, gen->inverse);
      }
    } else {
      const auto s_inv = model.invert(s);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const auto& x = ball_->key(static_cast<std::size_t>(i));
        const auto up = ball_->index_of(model.multiply(x, s));
        const auto down = ball_->index_of(model.multiply(x, s_inv));
        successors_[static_cast<std::size_t>(i) * m + j] = up ? static_cast<std::int32_t>(*up) : -1;
        predecessors_[static_cast<std::size_t>(i) * m + j] = down ? static_cast<std::int32_t>(*down) : -1;
      }
    }
  }
}

namespace kernels {

namespace {

inline double gather(const std::int32_t* row, const double* w, std::size_t m, const double* in, std::int32_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto src = row[j];
    if (src >= 0 && src < n) acc += w[j] * in[src];
  }
  return acc;
}

void check_sizes(const WalkDomain& domain, std::span<const double> in, std::span<double> out) {
  if (in.size() != out.size() || in.size() > domain.size())
    throw UsageError("kernel vectors must have equal length within the domain size");
}

}  // namespace

void forward_step(const WalkDomain& domain, std::span<const double> in, std::span<double> out) {
  check_sizes(domain, in, out);
  const auto m = domain.width();
  const auto* table = domain.predecessors().data();
  const auto* w = domain.weights().data();
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  const auto limit = static_cast<std::int32_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = gather(table + i * m, w, m, in.data(), limit);
}

void forward_step_serial(const WalkDomain& domain, std::span<const double> in, std::span<double> out) {
  check_sizes(domain, in, out);
  const auto m = domain.width();
  const auto n = static_cast<std::int32_t>(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto src = domain.predecessor(i, j);
      if (src >= 0 && src < n) acc += domain.weights()[j] * in[static_cast<std::size_t>(src)];
    }
    out[i] = acc;
  }
}

void backward_step(const WalkDomain& domain, std::span<const double> in, std::span<double> out) {
  check_sizes(domain, in, out);
  const auto m = domain.width();
  const auto* table = domain.successors().data();
  const auto* w = domain.weights().data();
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  const auto limit = static_cast<std::int32_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = gather(table + i * m, w, m, in.data(), limit);
}

void backward_step_serial(const WalkDomain& domain, std::span<const double> in, std::span<double> out) {
  check_sizes(domain, in, out);
  const auto m = domain.width();
  const auto n = static_cast<std::int32_t>(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto dst = domain.successor(i, j);
      if (dst >= 0 && dst < n) acc += domain.weights()[j] * in[static_cast<std::size_t>(dst)];
    }
    out[i] = acc;
  }
}

double ordered_sum(std::span<const double> values) {
  constexpr std::size_t chunk = 1 << 14;
  const auto chunks = (values.size() + chunk - 1) / chunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const auto first = static_cast<std::size_t>(c) * chunk;
    const auto last = std::min(values.size(), first + chunk);
    double acc = 0.0;
    for (std::size_t i = first; i < last; ++i) acc += values[i];
    partial[static_cast<std::size_t>(c)] = acc;
  }
  double total = 0.0;
  for (auto p : partial) total += p;
  return total;
}

}  // namespace kernels

}  // namespace lv
