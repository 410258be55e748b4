#include "liouville/gridlab.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "liouville/errors.hpp"

namespace lv::grid {

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw UsageError("cannot read integer '" + std::string(s) + "' in " + std::string(what));
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int floor_div2(int a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::string to_string(const Point& p, int dim) {
  return dim == 1 ? std::to_string(p.x) : std::to_string(p.x) + ";" + std::to_string(p.y);
}

Point GridDomain::normalize(Point p) const {
  if (period_ > 0) p.y = ((p.y % period_) + period_) % period_;
  return p;
}

std::vector<Point> GridDomain::neighbors(Point p) const {
  if (dim_ == 1) return {{p.x - 1, p.y}, {p.x + 1, p.y}};
  return {normalize({p.x - 1, p.y}), normalize({p.x + 1, p.y}), normalize({p.x, p.y - 1}),
          normalize({p.x, p.y + 1})};
}

GridDomain GridDomain::from_cells(int dim, std::vector<Point> cells, int period, Faces faces) {
  if (dim != 1 && dim != 2) throw UsageError("grid dimension must be 1 or 2");
  if (period < 0 || (period > 0 && dim != 2)) throw UsageError("periodic domains must be two-dimensional");
  GridDomain d;
  d.dim_ = dim;
  d.period_ = period;
  for (auto& c : cells) {
    if (dim == 1) c.y = 0;
    c = d.normalize(c);
  }
  std::sort(cells.begin(), cells.end(), RowMajor{});
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  d.cells_ = std::move(cells);
  for (std::size_t i = 0; i < d.cells_.size(); ++i) d.cell_index_.emplace(d.cells_[i], i);

  for (const auto& c : d.cells_) {
    const auto nb = d.neighbors(c);
    const bool inside = std::all_of(nb.begin(), nb.end(), [&](const Point& q) { return d.cell_index_.count(q) > 0; });
    if (inside) {
      d.interior_index_.emplace(c, d.interior_.size());
      d.interior_.push_back(c);
    } else {
      d.boundary_index_.emplace(c, d.boundary_.size());
      d.boundary_.push_back(c);
    }
  }
  if (d.interior_.empty()) throw UsageError("grid domain has an empty interior");

  d.face_names_ = std::move(faces.names);
  d.boundary_face_.assign(d.boundary_.size(), -1);
  for (std::size_t b = 0; b < d.boundary_.size(); ++b) {
    auto it = faces.face_of.find(d.boundary_[b]);
    if (it != faces.face_of.end()) d.boundary_face_[b] = it->second;
  }
  return d;
}

GridDomain GridDomain::interval(int n) {
  if (n < 2) throw UsageError("interval(n) needs n >= 2");
  std::vector<Point> cells;
  for (int x = 0; x <= n; ++x) cells.push_back({x, 0});
  return from_cells(1, std::move(cells));
}

GridDomain GridDomain::rectangle(int w, int h, int x0, int y0) {
  if (w < 2 || h < 2) throw UsageError("rectangle(w,h) needs w, h >= 2");
  std::vector<Point> cells;
  for (int y = y0; y <= y0 + h; ++y)
    for (int x = x0; x <= x0 + w; ++x) cells.push_back({x, y});
  return from_cells(2, std::move(cells));
}

GridDomain GridDomain::tile(int s) {
  if (s < 2) throw UsageError("tile(s) needs s >= 2");
  Faces faces;
  faces.names = {"bottom", "top", "left", "right"};
  std::vector<Point> cells;
  for (int y = 0; y <= s; ++y) {
    for (int x = 0; x <= s; ++x) {
      cells.push_back({x, y});
      if (y == 0)
        faces.face_of[{x, y}] = 0;
      else if (y == s)
        faces.face_of[{x, y}] = 1;
      else if (x == 0)
        faces.face_of[{x, y}] = 2;
      else if (x == s)
        faces.face_of[{x, y}] = 3;
    }
  }
  return from_cells(2, std::move(cells), 0, std::move(faces));
}

GridDomain GridDomain::union_of_tiles(const GridDomain& tile, const std::vector<Point>& translates) {
  if (translates.empty()) throw UsageError("union of tiles needs at least one translate");
  Faces faces;
  std::vector<Point> cells;
  for (std::size_t i = 0; i < translates.size(); ++i) {
    faces.names.push_back("C_" + std::to_string(i));
    for (const auto& c : tile.cells()) {
      const Point p{c.x + translates[i].x, c.y + translates[i].y};
      cells.push_back(p);
      faces.face_of.emplace(p, static_cast<int>(i));
    }
  }
  return from_cells(tile.dim(), std::move(cells), tile.period(), std::move(faces));
}

GridDomain GridDomain::strip(int s, int period, int n) {
  if (s < 2 || period < 2 || n < 0) throw UsageError("strip needs tile width >= 2, period >= 2 and n >= 0");
  Faces faces;
  faces.names = {"C_" + std::to_string(-n) + " (left end)", "C_" + std::to_string(n) + " (right end)"};
  const int left = -n * s, right = (n + 1) * s;
  std::vector<Point> cells;
  for (int y = 0; y < period; ++y) {
    for (int x = left; x <= right; ++x) {
      cells.push_back({x, y});
      if (x == left) faces.face_of[{x, y}] = 0;
      if (x == right) faces.face_of[{x, y}] = 1;
    }
  }
  return from_cells(2, std::move(cells), period, std::move(faces));
}

GridDomain GridDomain::from_mask(std::string_view text) {
  std::vector<Point> cells;
  int y = 0;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    for (int x = 0; x < static_cast<int>(line.size()); ++x) {
      if (line[x] == '#')
        cells.push_back({x, y});
      else if (line[x] != '.')
        throw UsageError("mask may only contain '#' and '.'");
    }
    ++y;
  }
  return from_cells(2, std::move(cells));
}

GridDomain GridDomain::load_mask(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open mask file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_mask(ss.str());
}

std::optional<std::size_t> GridDomain::interior_index(Point p) const {
  auto it = interior_index_.find(normalize(p));
  if (it == interior_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> GridDomain::boundary_index(Point p) const {
  auto it = boundary_index_.find(normalize(p));
  if (it == boundary_index_.end()) return std::nullopt;
  return it->second;
}

Point GridDomain::center() const {
  int x0 = cells_.front().x, x1 = x0, y0 = cells_.front().y, y1 = y0;
  for (const auto& c : cells_) {
    x0 = std::min(x0, c.x);
    x1 = std::max(x1, c.x);
    y0 = std::min(y0, c.y);
    y1 = std::max(y1, c.y);
  }
  const Point mid{floor_div2(x0 + x1), floor_div2(y0 + y1)};
  Point best = interior_.front();
  int best_d = std::numeric_limits<int>::max();
  for (const auto& p : interior_) {
    const int d = std::abs(p.x - mid.x) + std::abs(p.y - mid.y);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

GridDomain parse_domain_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  const auto kind = spec.substr(0, colon);
  const auto rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (kind == "interval") return GridDomain::interval(parse_int(rest, "interval spec"));
  if (kind == "tile") return GridDomain::tile(parse_int(rest, "tile spec"));
  if (kind == "mask") return GridDomain::load_mask(std::string(rest));
  if (kind == "rectangle") {
    const auto at = rest.find('@');
    const auto dims = split(rest.substr(0, at), 'x');
    if (dims.size() != 2) throw UsageError("rectangle spec must look like rectangle:WxH[@X,Y]");
    int x0 = 0, y0 = 0;
    if (at != std::string_view::npos) {
      const auto off = split(rest.substr(at + 1), ',');
      if (off.size() != 2) throw UsageError("rectangle offset must look like @X,Y");
      x0 = parse_int(off[0], "rectangle offset");
      y0 = parse_int(off[1], "rectangle offset");
    }
    return GridDomain::rectangle(parse_int(dims[0], "rectangle width"), parse_int(dims[1], "rectangle height"), x0,
                                 y0);
  }
  if (kind == "strip") {
    const auto parts = split(rest, ':');
    const auto dims = split(parts[0], 'x');
    if (parts.size() != 2 || dims.size() != 2) throw UsageError("strip spec must look like strip:SxP:N");
    return GridDomain::strip(parse_int(dims[0], "strip tile width"), parse_int(dims[1], "strip period"),
                             parse_int(parts[1], "strip tiles"));
  }
  throw UsageError("unknown domain spec '" + std::string(spec) + "'");
}

Point parse_point(const GridDomain& domain, std::string_view text) {
  if (text.empty() || text == "center") return domain.center();
  const auto parts = split(text, ',');
  if (domain.dim() == 1 && parts.size() == 1) return {parse_int(parts[0], "start point"), 0};
  if (domain.dim() == 2 && parts.size() == 2)
    return {parse_int(parts[0], "start point"), parse_int(parts[1], "start point")};
  throw UsageError("start point '" + std::string(text) + "' does not match the domain dimension");
}

std::vector<double> ExitKernel::row(const GridDomain& domain, Point p) const {
  std::vector<double> out(cols_, 0.0);
  if (const auto i = domain.interior_index(p)) {
    for (std::size_t b = 0; b < cols_; ++b) out[b] = (*this)(*i, b);
  } else if (const auto b = domain.boundary_index(p)) {
    out[*b] = 1.0;
  } else {
    throw UsageError("point " + to_string(p, domain.dim()) + " is not a cell of the domain");
  }
  return out;
}

double ExitKernel::stochasticity_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t b = 0; b < cols_; ++b) s += (*this)(i, b);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

ExitKernel exit_kernel(const GridDomain& domain) {
  const auto n = domain.interior().size();
  const auto m = domain.boundary().size();
  const double w = 1.0 / (2.0 * domain.dim());

  std::vector<Eigen::Triplet<double>> a, b;
  for (std::size_t i = 0; i < n; ++i) {
    a.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    for (const auto& q : domain.neighbors(domain.interior()[i])) {
      if (const auto j = domain.interior_index(q))
        a.emplace_back(static_cast<int>(i), static_cast<int>(*j), -w);
      else
        b.emplace_back(static_cast<int>(i), static_cast<int>(*domain.boundary_index(q)), w);
    }
  }
  Eigen::SparseMatrix<double> A(static_cast<int>(n), static_cast<int>(n));
  Eigen::SparseMatrix<double> B(static_cast<int>(n), static_cast<int>(m));
  A.setFromTriplets(a.begin(), a.end());
  B.setFromTriplets(b.begin(), b.end());

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(ExitCode::internal, "Dirichlet system is singular");

  ExitKernel kernel(n, m);
  constexpr std::ptrdiff_t block = 32;
  const auto blocks = (static_cast<std::ptrdiff_t>(m) + block - 1) / block;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < blocks; ++k) {
    const auto first = k * block;
    const auto count = std::min<std::ptrdiff_t>(block, static_cast<std::ptrdiff_t>(m) - first);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd(B.middleCols(first, count));
    const Eigen::MatrixXd x = lu.solve(rhs);
    for (std::ptrdiff_t c = 0; c < count; ++c)
      for (std::size_t i = 0; i < n; ++i) kernel(i, static_cast<std::size_t>(first + c)) = x(static_cast<int>(i), c);
  }
  return kernel;
}

std::vector<double> harmonic_extension(const GridDomain& domain, const ExitKernel& kernel,
                                       const std::vector<double>& boundary_values) {
  if (boundary_values.size() != domain.boundary().size())
    throw UsageError("harmonic extension needs one value per boundary point (" +
                     std::to_string(domain.boundary().size()) + "), got " + std::to_string(boundary_values.size()));
  std::vector<double> out(kernel.rows(), 0.0);
  for (std::size_t i = 0; i < kernel.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t b = 0; b < kernel.cols(); ++b) acc += kernel(i, b) * boundary_values[b];
    out[i] = acc;
  }
  return out;
}

double mean_value_residual(const GridDomain& domain, const std::vector<double>& interior_values,
                           const std::vector<double>& boundary_values) {
  const double w = 1.0 / (2.0 * domain.dim());
  double worst = 0.0;
  for (std::size_t i = 0; i < domain.interior().size(); ++i) {
    double mean = 0.0;
    for (const auto& q : domain.neighbors(domain.interior()[i])) {
      if (const auto j = domain.interior_index(q))
        mean += w * interior_values[*j];
      else
        mean += w * boundary_values[*domain.boundary_index(q)];
    }
    worst = std::max(worst, std::abs(interior_values[i] - mean));
  }
  return worst;
}

void require_nested(const GridDomain& inner, const GridDomain& outer) {
  if (inner.dim() != outer.dim() || inner.period() != outer.period())
    throw UsageError("nested domains must share dimension and period");
  for (const auto& c : inner.cells())
    if (!outer.contains(c)) throw UsageError("cell " + to_string(c, inner.dim()) + " of the inner domain is missing");
  for (const auto& c : inner.interior())
    if (!outer.interior_index(c)) throw UsageError("interior of the inner domain is not interior to the outer one");
}

double smp_check(const GridDomain& inner, const GridDomain& outer, Point x) {
  require_nested(inner, outer);
  if (!inner.interior_index(x)) throw UsageError("start point must be interior to the inner domain");
  const auto k1 = exit_kernel(inner);
  const auto k2 = exit_kernel(outer);
  const auto direct = k2.row(outer, x);
  const auto first = k1.row(inner, x);
  std::vector<double> composed(direct.size(), 0.0);
  for (std::size_t z = 0; z < first.size(); ++z) {
    if (first[z] == 0.0) continue;
    const auto row = k2.row(outer, inner.boundary()[z]);
    for (std::size_t b = 0; b < row.size(); ++b) composed[b] += first[z] * row[b];
  }
  double worst = 0.0;
  for (std::size_t b = 0; b < direct.size(); ++b) worst = std::max(worst, std::abs(direct[b] - composed[b]));
  return worst;
}

EpsRatio eps_ratio(const GridDomain& domain, const ExitKernel& kernel, Point x, Point y) {
  if (!domain.interior_index(x) || !domain.interior_index(y))
    throw UsageError("eps_ratio needs interior start points");
  const auto rx = kernel.row(domain, x);
  const auto ry = kernel.row(domain, y);
  EpsRatio out;
  out.harnack_min = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t b = 0; b < rx.size(); ++b) {
    if (rx[b] == 0.0 && ry[b] == 0.0) continue;
    if (ry[b] == 0.0) {
      out.restricted = true;
      continue;
    }
    const double r = rx[b] / ry[b];
    out.harnack_min = std::min(out.harnack_min, r);
    out.harnack_max = std::max(out.harnack_max, r);
    const double v = std::abs(r - 1.0);
    if (!any || v > out.value) {
      out.value = v;
      out.witness = domain.boundary()[b];
      any = true;
    }
  }
  if (!any) throw NumericError("no boundary point carries mass from both start points");
  return out;
}

EpsRatio eps_ratio(const GridDomain& domain, Point x, Point y) { return eps_ratio(domain, exit_kernel(domain), x, y); }

Monotonicity nested_monotonicity(const GridDomain& inner, const GridDomain& outer, Point x, Point y) {
  require_nested(inner, outer);
  Monotonicity out;
  out.inner = eps_ratio(inner, x, y).value;
  out.outer = eps_ratio(outer, x, y).value;
  out.holds = out.outer <= out.inner + 1e-10;
  return out;
}

SideMasses side_masses(const GridDomain& domain, const ExitKernel& kernel, Point x) {
  if (!domain.has_faces()) throw UsageError("domain has no labelled faces");
  const auto row = kernel.row(domain, x);
  SideMasses out;
  out.names = domain.face_names();
  out.mass.assign(out.names.size(), 0.0);
  for (std::size_t b = 0; b < row.size(); ++b) {
    const int f = domain.boundary_face()[b];
    if (f >= 0) out.mass[static_cast<std::size_t>(f)] += row[b];
  }
  out.min_mass = *std::min_element(out.mass.begin(), out.mass.end());
  return out;
}

SideMasses side_masses(const GridDomain& domain, Point x) { return side_masses(domain, exit_kernel(domain), x); }

TileProduct tile_product(int s, int period, int n) {
  if (n < 1) throw UsageError("tile product needs n >= 1");
  const auto base = GridDomain::strip(s, period, 0);
  const auto K = GridDomain::strip(s, period, n);
  const auto kernel = exit_kernel(K);
  const Point x{s / 2, 0};

  TileProduct out;
  out.n = n;
  out.base_side_min = side_masses(base, x).min_mass;
  auto face_mass = [&](Point p) { return side_masses(K, kernel, p).mass[1]; };
  out.direct = face_mass(x);
  out.product = 1.0;
  for (int i = 0; i < n; ++i) {
    const Point a{x.x + i * s, 0}, b{x.x + (i + 1) * s, 0};
    out.factors.push_back(face_mass(a) / face_mass(b));
    out.step_eps.push_back(eps_ratio(K, kernel, a, b).value);
    out.product *= out.factors.back();
  }
  out.end_mass = face_mass({x.x + n * s, 0});
  out.product *= out.end_mass;
  out.residual = std::abs(out.product - out.direct) / out.direct;
  return out;
}

McResult mc_exit_sampler(const GridDomain& domain, const ExitKernel& kernel, Point x, std::uint64_t seed,
                         std::uint64_t paths) {
  if (paths == 0) throw UsageError("Monte Carlo sampler needs at least one path");
  const auto start = domain.interior_index(x);
  if (!start) throw UsageError("sampler start point must be interior");

  // Cell graph: interior cells first, boundary cells after.
  const auto n = domain.interior().size();
  const auto deg = static_cast<std::size_t>(2 * domain.dim());
  std::vector<std::size_t> next(n * deg);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = domain.neighbors(domain.interior()[i]);
    for (std::size_t k = 0; k < deg; ++k) {
      const auto j = domain.interior_index(nb[k]);
      next[i * deg + k] = j ? *j : n + *domain.boundary_index(nb[k]);
    }
  }
  const int shift = domain.dim() == 1 ? 63 : 62;

  McResult out;
  out.paths = paths;
  out.seed = seed;
  out.counts.assign(domain.boundary().size(), 0);
  const auto m = out.counts.size();
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(m, 0);
#pragma omp for schedule(static)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(paths); ++p) {
      const std::uint64_t key = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(p)));
      std::uint64_t counter = 0;
      std::size_t cur = *start;
      while (cur < n) {
        const auto r = splitmix64(key + 0x9e3779b97f4a7c15ULL * counter++);
        cur = next[cur * deg + static_cast<std::size_t>(r >> shift)];
      }
      ++local[cur - n];
    }
#pragma omp critical
    for (std::size_t b = 0; b < m; ++b) out.counts[b] += local[b];
  }

  const auto exact = kernel.row(domain, x);
  out.empirical.resize(m);
  double tv = 0.0;
  for (std::size_t b = 0; b < m; ++b) {
    out.empirical[b] = static_cast<double>(out.counts[b]) / static_cast<double>(paths);
    tv += std::abs(out.empirical[b] - exact[b]);
  }
  out.tv = 0.5 * tv;
  return out;
}

McResult mc_exit_sampler(const GridDomain& domain, Point x, std::uint64_t seed, std::uint64_t paths) {
  return mc_exit_sampler(domain, exit_kernel(domain), x, seed, paths);
}

}  // namespace lv::grid
