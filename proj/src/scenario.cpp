#include "liouville/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "liouville/errors.hpp"
#include "liouville/gridlab.hpp"
#include "liouville/harmonic.hpp"
#include "liouville/measure.hpp"
#include "liouville/potential.hpp"
#include "liouville/word_ball.hpp"

namespace lv {

using json = nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(',', start);
    const auto item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!item.empty()) out.emplace_back(item);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

ParamSpec P(std::string section, std::string key, ParamType type, std::string fallback, double lo, double hi,
            std::string help) {
  return ParamSpec{std::move(section), std::move(key), type, std::move(fallback), lo, hi, std::move(help)};
}

void add_potential_keys(std::vector<ParamSpec>& s, const std::string& sec, const std::string& trunc) {
  s.push_back(P(sec, "trunc", ParamType::integer, trunc, 1, 100000, "truncation order K of the Green series"));
  s.push_back(P(sec, "domain_budget", ParamType::integer, "1500000", 1, 50000000,
                "element budget of the killed-walk domain"));
  s.push_back(P(sec, "domain_radius", ParamType::integer, "0", 0, 100000, "fixed domain radius, 0 for automatic"));
  s.push_back(P(sec, "allow_recurrent", ParamType::boolean, "false", 0, 0, "skip the transience gate"));
}

std::vector<ParamSpec> build_schema() {
  using T = ParamType;
  std::vector<ParamSpec> s;
  s.push_back(P("run", "scenario", T::text, "", 0, 0, "growth, green, martin, deviation, obstruct or grid"));
  s.push_back(P("run", "model", T::text, "free:2", 0, 0, "group model spec"));
  s.push_back(P("run", "measure", T::text, "srw", 0, 0, "srw, lazy:<p> or a word,weight CSV file"));
  s.push_back(P("run", "seed", T::integer, "0", 0, 9007199254740992.0, "random seed"));
  s.push_back(P("run", "threads", T::integer, "0", 0, 4096, "OpenMP threads, 0 for the runtime default"));

  s.push_back(P("growth", "n", T::integer, "10", 2, 100000, "largest word-ball radius"));
  s.push_back(P("growth", "budget", T::integer, "10000000", 1, 1e9, "element budget"));

  add_potential_keys(s, "green", "200");
  s.push_back(P("green", "elements", T::text, "e,a,ab,aba,abab", 0, 0, "words w for the g(e,w) table"));
  s.push_back(P("green", "rmin", T::real, "2", 1e-9, 1e6, "smallest Green-ball radius"));
  s.push_back(P("green", "rmax", T::real, "8", 1e-9, 1e6, "largest Green-ball radius"));
  s.push_back(P("green", "rstep", T::real, "0.5", 1e-6, 1e6, "Green-ball radius step"));
  s.push_back(P("green", "search", T::integer, "0", 0, 100000, "word radius scanned, 0 for domain radius - 2"));

  add_potential_keys(s, "martin", "400");
  s.push_back(P("martin", "word", T::text, "a", 0, 0, "z_n = word^n"));
  s.push_back(P("martin", "nmin", T::integer, "8", 1, 100000, "first n"));
  s.push_back(P("martin", "nmax", T::integer, "12", 1, 100000, "last n"));
  s.push_back(P("martin", "origin", T::text, "e", 0, 0, "origin y of the kernel"));
  s.push_back(P("martin", "window", T::integer, "2", 1, 1000, "radius of the evaluation window"));
  s.push_back(P("martin", "tol", T::real, "1e-6", 0, 1e6, "nonconstancy tolerance"));

  add_potential_keys(s, "deviation", "400");
  s.push_back(P("deviation", "x", T::text, "a", 0, 0, "first kernel argument"));
  s.push_back(P("deviation", "y", T::text, "e", 0, 0, "kernel origin"));
  s.push_back(P("deviation", "nmin", T::integer, "2", 0, 100000, "smallest excluded ball radius"));
  s.push_back(P("deviation", "nmax", T::integer, "8", 0, 100000, "largest excluded ball radius"));
  s.push_back(P("deviation", "offset", T::integer, "4", 1, 100000, "window radius minus n"));

  add_potential_keys(s, "obstruct", "200");
  s.push_back(P("obstruct", "n0", T::integer, "3", 1, 100000, "excluded ball radius"));
  s.push_back(P("obstruct", "window", T::integer, "7", 2, 100000, "window radius N"));
  s.push_back(P("obstruct", "growth_radius", T::integer, "60", 2, 100000, "radius cap of the growth estimate"));
  s.push_back(P("obstruct", "growth_budget", T::integer, "200000", 1, 1e9, "element budget of the growth estimate"));
  s.push_back(P("obstruct", "margin", T::real, "0.05", 0, 1e6, "rate margin of the verdict"));
  s.push_back(P("obstruct", "stability", T::real, "0.05", 0, 1e6, "allowed drift of delta_hat between windows"));

  s.push_back(P("grid", "domain", T::text, "interval:10", 0, 0, "domain spec"));
  s.push_back(P("grid", "from", T::text, "center", 0, 0, "start point"));
  s.push_back(P("grid", "paths", T::integer, "100000", 1, 1e10, "Monte Carlo paths"));
  return s;
}

std::string canonical(const ParamSpec& spec, std::string_view raw) {
  const auto v = trim(raw);
  const auto where = "[" + spec.section + "] " + spec.key;
  switch (spec.type) {
    case ParamType::integer: {
      long long x = 0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc{} || ptr != v.data() + v.size()) {
        // Accept integral values written in floating form, e.g. 1e5.
        double d = 0;
        auto [p2, e2] = std::from_chars(v.data(), v.data() + v.size(), d);
        if (e2 != std::errc{} || p2 != v.data() + v.size() || d != std::floor(d) || std::abs(d) > 9.2e18)
          throw UsageError(where + ": expected an integer, got '" + std::string(v) + "'");
        x = static_cast<long long>(d);
      }
      if (x < spec.min || x > spec.max)
        throw UsageError(where + " = " + std::to_string(x) + " outside [" + format_number(spec.min) + ", " +
                         format_number(spec.max) + "]");
      return std::to_string(x);
    }
    case ParamType::real: {
      double x = 0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(x))
        throw UsageError(where + ": expected a number, got '" + std::string(v) + "'");
      if (x < spec.min || x > spec.max)
        throw UsageError(where + " = " + std::string(v) + " outside [" + format_number(spec.min) + ", " +
                         format_number(spec.max) + "]");
      return format_number(x);
    }
    case ParamType::boolean:
      if (v == "true" || v == "1" || v == "yes" || v == "on") return "true";
      if (v == "false" || v == "0" || v == "no" || v == "off") return "false";
      throw UsageError(where + ": expected true or false, got '" + std::string(v) + "'");
    case ParamType::text:
      if (v.find('\n') != std::string_view::npos) throw UsageError(where + ": value spans several lines");
      return std::string(v);
  }
  return std::string(v);
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

struct Csv {
  std::ostringstream out;
  explicit Csv(std::string_view header) { out << header << '\n'; }
  template <typename... Ts>
  void row(const Ts&... cells) {
    std::size_t i = 0;
    ((out << (i++ ? "," : "") << cell(cells)), ...);
    out << '\n';
  }
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  static std::string cell(const char* s) { return cell(std::string(s)); }
};

void add_series(json& report, const std::string& name, const std::string& xlabel, const std::string& ylabel,
                const std::vector<std::pair<double, double>>& points) {
  json pts = json::array();
  for (const auto& [x, y] : points) pts.push_back({num(x), num(y)});
  report["series"][name] = {{"x", xlabel}, {"y", ylabel}, {"file", name + "_curve.csv"}, {"points", pts}};
}

PotentialOptions potential_options(const ScenarioConfig& c) {
  const auto& s = c.scenario();
  PotentialOptions o;
  o.trunc = static_cast<int>(c.integer(s, "trunc"));
  o.domain_budget = static_cast<std::size_t>(c.integer(s, "domain_budget"));
  o.domain_radius = static_cast<int>(c.integer(s, "domain_radius"));
  o.allow_recurrent = c.boolean(s, "allow_recurrent");
  return o;
}

json potential_provenance(const Potential& p) {
  return {{"trunc", p.trunc()},
          {"domain_radius", p.domain().radius()},
          {"domain_size", p.domain().size()},
          {"rho_hat", num(p.field().rho_hat())},
          {"tail_mode", to_string(p.field().tail_mode())},
          {"leaked_mass", num(p.field().leaked_mass())}};
}

struct Context {
  const ScenarioConfig& config;
  ModelPtr model;
  std::optional<Measure> mu;
  json report;
  ReportBundle bundle;
};

void run_growth(Context& ctx) {
  const auto& c = ctx.config;
  const int n = static_cast<int>(c.integer("growth", "n"));
  const auto ball = WordBall::enumerate(ctx.model, n, static_cast<std::size_t>(c.integer("growth", "budget")));
  const auto g = growth_rate(ball);
  Csv csv("n,ball,sphere,normalized");
  std::vector<std::pair<double, double>> curve;
  for (int r = 0; r <= n; ++r) {
    const double norm = r == 0 ? 0.0 : g.normalized[static_cast<std::size_t>(r - 1)];
    csv.row(r, ball.cardinality(r), ball.sphere_size(r), norm);
    if (r > 0) curve.emplace_back(r, norm);
  }
  ctx.bundle.files["growth.csv"] = csv.out.str();
  json sizes = json::array();
  for (auto s : g.sizes) sizes.push_back(s);
  ctx.report["results"] = {{"rate", num(g.rate)}, {"first_fitted", g.first_fitted}, {"ball_sizes", sizes}};
  ctx.report["provenance"] = {{"radius", n}, {"fit", "least squares of ln|W_n| on n in [N/2, N]"}};
  add_series(ctx.report, "growth", "n", "(1/n) ln|W_n|", curve);
}

void run_green(Context& ctx) {
  const auto& c = ctx.config;
  const Potential p(*ctx.mu, potential_options(c));
  const auto& m = *ctx.model;
  const auto e = m.identity();

  Csv green("x,y,K,lower,upper");
  json table = json::array();
  for (const auto& w : split_list(c.text("green", "elements"))) {
    const auto y = m.parse(w);
    const auto g = p.green(e, y);
    green.row(std::string("e"), m.format(y), g.K, g.lower, g.upper);
    json row = {{"y", m.format(y)}, {"lower", num(g.lower)}, {"upper", num(g.upper)}};
    if (g.lower > 0) {
      const auto d = p.green_metric(e, y);
      row["green_metric"] = num(d.value);
      row["green_metric_half_width"] = num(d.half_width);
    }
    table.push_back(row);
  }
  ctx.bundle.files["green.csv"] = green.out.str();

  int search = static_cast<int>(c.integer("green", "search"));
  if (search == 0) search = std::max(1, p.domain().radius() - 2);
  const double rmin = c.real("green", "rmin"), rmax = c.real("green", "rmax"), rstep = c.real("green", "rstep");
  if (rmin > rmax) throw UsageError("[green] rmin must not exceed rmax");
  Csv ball("r,count,complete");
  std::vector<std::pair<double, double>> curve;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  bool all_complete = true;
  const auto steps = static_cast<int>(std::floor((rmax - rmin) / rstep + 1e-9));
  for (int i = 0; i <= steps; ++i) {
    const double r = rmin + i * rstep;
    const auto b = p.green_ball(r, search);
    ball.row(r, b.count(), b.complete);
    const double ln = std::log(static_cast<double>(b.count()));
    curve.emplace_back(r, ln / r);
    sx += r;
    sy += ln;
    sxx += r * r;
    sxy += r * ln;
    ++count;
    all_complete = all_complete && b.complete;
  }
  ctx.bundle.files["ball.csv"] = ball.out.str();
  const double denom = count * sxx - sx * sx;
  const double slope = count > 1 && denom > 0 ? (count * sxy - sx * sy) / denom : curve.back().second;

  ctx.report["results"] = {{"green", table},
                           {"ball_growth_slope", num(slope)},
                           {"ball_growth_at_rmax", num(curve.back().second)},
                           {"balls_complete", all_complete}};
  auto prov = potential_provenance(p);
  prov["search_radius"] = search;
  ctx.report["provenance"] = prov;
  add_series(ctx.report, "ball", "r", "(1/r) ln|B_g(r)|", curve);
}

void run_martin(Context& ctx) {
  const auto& c = ctx.config;
  const auto& m = *ctx.model;
  const auto u = m.parse(c.text("martin", "word"));
  const int nmin = static_cast<int>(c.integer("martin", "nmin")), nmax = static_cast<int>(c.integer("martin", "nmax"));
  if (nmin > nmax) throw UsageError("[martin] nmin must not exceed nmax");
  std::vector<GroupElement> zseq;
  auto z = m.identity();
  for (int n = 1; n <= nmax; ++n) {
    z = m.mul(z, u);
    if (n >= nmin) zseq.push_back(z);
  }
  const auto y = m.parse(c.text("martin", "origin"));
  const int window = static_cast<int>(c.integer("martin", "window"));
  const auto opts = potential_options(c);
  const auto lim = martin_limit(*ctx.mu, zseq, y, window, opts);
  const auto cls = classify(lim.candidate, *ctx.mu, c.real("martin", "tol"));

  Csv csv("x,value,cauchy_delta");
  const auto& ball = *lim.candidate.window;
  for (std::size_t i = 0; i < ball.size(); ++i) csv.row(m.describe(ball.key(i)), lim.candidate.values[i], lim.cauchy_delta[i]);
  ctx.bundle.files["martin.csv"] = csv.out.str();

  std::vector<std::pair<double, double>> curve;
  for (std::size_t t = 1; t < lim.terms.size(); ++t) {
    double d = 0;
    for (std::size_t i = 0; i < ball.size(); ++i) d = std::max(d, std::abs(lim.terms[t][i] - lim.terms[t - 1][i]));
    curve.emplace_back(nmin + static_cast<int>(t), d);
  }
  ctx.report["results"] = {{"positive", cls.positive},
                           {"nonconstant", cls.nonconstant},
                           {"ratio", num(cls.ratio)},
                           {"max_residual", num(cls.max_residual)},
                           {"worst_interior_point", m.format(cls.worst)},
                           {"interior_points", cls.interior},
                           {"max_cauchy_delta", num(lim.max_cauchy_delta)},
                           {"max_tail_residual", num(lim.max_tail_residual)},
                           {"diverging", lim.diverging}};
  ctx.report["provenance"] = {{"trunc", lim.trunc},
                              {"domain_radius", lim.domain_radius},
                              {"window", window},
                              {"sequence", m.format(u) + "^n, n = " + std::to_string(nmin) + ".." +
                                               std::to_string(nmax)},
                              {"origin", m.format(y)},
                              {"empirical", "values are killed-walk kernels on the domain, not limits over the group"}};
  if (!curve.empty()) add_series(ctx.report, "martin", "n", "max_x |K_n(x) - K_{n-1}(x)|", curve);
}

void run_deviation(Context& ctx) {
  const auto& c = ctx.config;
  const auto& m = *ctx.model;
  const Potential p(*ctx.mu, potential_options(c));
  const auto x = m.parse(c.text("deviation", "x"));
  const auto y = m.parse(c.text("deviation", "y"));
  const int nmin = static_cast<int>(c.integer("deviation", "nmin"));
  const int nmax = static_cast<int>(c.integer("deviation", "nmax"));
  const int offset = static_cast<int>(c.integer("deviation", "offset"));
  if (nmin > nmax) throw UsageError("[deviation] nmin must not exceed nmax");

  Csv csv("n,window,value,witness");
  json rows = json::array();
  std::vector<std::pair<double, double>> curve;
  bool monotone = true;
  double previous = 0, worst_drift = 0;
  for (int n = nmin; n <= nmax; ++n) {
    const auto d = p.deviation_outside_ball(n, x, y, n + offset);
    const auto wide = p.deviation_outside_ball(n, x, y, n + offset + 2);
    csv.row(n, d.window, d.value, m.format(d.argmax));
    csv.row(n, wide.window, wide.value, m.format(wide.argmax));
    rows.push_back({{"n", n},
                    {"value", num(d.value)},
                    {"value_wide", num(wide.value)},
                    {"witness", m.format(d.argmax)},
                    {"scanned", d.scanned}});
    if (n > nmin && d.value > previous) monotone = false;
    previous = d.value;
    worst_drift = std::max(worst_drift, std::abs(wide.value - d.value));
    curve.emplace_back(n, d.value);
  }
  ctx.bundle.files["deviation.csv"] = csv.out.str();
  ctx.report["results"] = {
      {"rows", rows}, {"non_increasing", monotone}, {"max_window_drift", num(worst_drift)}, {"last", num(previous)}};
  auto prov = potential_provenance(p);
  prov["windows"] = "n + " + std::to_string(offset) + " and n + " + std::to_string(offset + 2);
  prov["x"] = m.format(x);
  prov["y"] = m.format(y);
  ctx.report["provenance"] = prov;
  add_series(ctx.report, "deviation", "n", "G(W_n; x, y)", curve);
}

void run_obstruct(Context& ctx) {
  const auto& c = ctx.config;
  const auto& m = *ctx.model;
  ObstructionOptions o;
  o.n0 = static_cast<int>(c.integer("obstruct", "n0"));
  o.window = static_cast<int>(c.integer("obstruct", "window"));
  o.potential = potential_options(c);
  o.growth_radius = static_cast<int>(c.integer("obstruct", "growth_radius"));
  o.growth_budget = static_cast<std::size_t>(c.integer("obstruct", "growth_budget"));
  o.margin = c.real("obstruct", "margin");
  o.stability = c.real("obstruct", "stability");
  const auto r = obstruction_report(*ctx.mu, o);

  json containment = json::array();
  std::vector<std::pair<double, double>> curve;
  for (const auto& row : r.containment) {
    containment.push_back({{"n", row.n},
                           {"r_of_n", num(row.radius)},
                           {"max_green_distance", num(row.max_distance)},
                           {"holds", row.holds}});
    curve.emplace_back(row.n, row.max_distance);
  }
  ctx.report["results"] = {
      {"n0", r.n0},
      {"delta_hat", num(r.delta_hat)},
      {"delta_hat_window_plus_2", num(r.delta_hat_wide)},
      {"delta_generator", m.format(r.delta_generator)},
      {"delta_witness", m.format(r.delta_witness)},
      {"c_hat", num(r.c_hat)},
      {"c_generator", m.format(r.c_generator)},
      {"c_witness", m.format(r.c_witness)},
      {"growth_word", num(r.growth_word)},
      {"bound_rate", num(r.bound_rate)},
      {"margin", num(r.margin)},
      {"containment", containment},
      {"containment_violations", r.containment_violations},
      {"verdict", to_string(r.verdict)},
      {"reason", r.reason},
      {"quantifiers",
       "delta_hat is measured for this n0 over a finite window; the Liouville argument fixes delta first and then "
       "needs some n0 with G(W_n0; e, h) <= delta for all h. A small delta_hat here does not prove that direction, "
       "and delta_hat >= 1 only shows the kernels stay away from 1 inside the window."}};
  ctx.report["provenance"] = {{"trunc", r.trunc},
                              {"domain_radius", r.domain_radius},
                              {"window", r.window},
                              {"window_wide", r.window + 2},
                              {"growth_radius", r.growth_radius},
                              {"distances", "midpoint Green estimates"}};
  if (!curve.empty()) add_series(ctx.report, "containment", "n", "max d_g over dW_n", curve);
}

void run_grid(Context& ctx) {
  using namespace grid;
  const auto& c = ctx.config;
  const auto spec = c.text("grid", "domain");
  const auto D = parse_domain_spec(spec);
  const auto x = parse_point(D, c.text("grid", "from"));
  if (!D.interior_index(x)) throw UsageError("[grid] from must be an interior point");
  const auto K = exit_kernel(D);
  const int dim = D.dim();

  Csv exit("x,boundary_point,mass");
  for (std::size_t i = 0; i < D.interior().size(); ++i)
    for (std::size_t b = 0; b < D.boundary().size(); ++b)
      if (K(i, b) != 0.0) exit.row(to_string(D.interior()[i], dim), to_string(D.boundary()[b], dim), K(i, b));
  ctx.bundle.files["exit.csv"] = exit.out.str();

  Csv checks("check,residual,verdict");
  auto check = [&](const std::string& name, double residual, double tol) {
    checks.row(name, residual, std::string(residual < tol ? "pass" : "fail"));
  };
  json results;
  check("row_stochasticity", K.stochasticity_defect(), 1e-10);

  std::vector<double> linear;
  for (const auto& b : D.boundary()) linear.push_back(b.x);
  const auto ext = harmonic_extension(D, K, linear);
  check("mean_value", mean_value_residual(D, ext, linear), 1e-10);
  double lin = 0;
  for (std::size_t i = 0; i < ext.size(); ++i) lin = std::max(lin, std::abs(ext[i] - D.interior()[i].x));
  check("linear_extension", lin, 1e-10);

  if (dim == 1 && D.cells().back().x - D.cells().front().x + 1 == static_cast<int>(D.cells().size())) {
    const double left = D.cells().front().x, right = D.cells().back().x;
    const auto rb = *D.boundary_index({static_cast<int>(right), 0});
    double worst = 0;
    for (std::size_t i = 0; i < D.interior().size(); ++i)
      worst = std::max(worst, std::abs(K(i, rb) - (D.interior()[i].x - left) / (right - left)));
    check("gambler_ruin", worst, 1e-12);
  }

  // Inner domain for the nesting checks: the interior of D as a cell set.
  std::optional<GridDomain> inner;
  try {
    inner = GridDomain::from_cells(dim, D.interior(), D.period());
  } catch (const UsageError&) {
  }
  const Point step = {x.x + 1, x.y};
  if (inner && inner->interior_index(x)) {
    check("strong_markov", smp_check(*inner, D, x), 1e-10);
    if (inner->interior_index(step)) {
      const auto mono = nested_monotonicity(*inner, D, x, step);
      checks.row(std::string("nested_monotonicity"), mono.outer - mono.inner, std::string(mono.holds ? "pass" : "fail"));
    } else {
      checks.row(std::string("nested_monotonicity"), 0.0, std::string("skipped"));
    }
  } else {
    checks.row(std::string("strong_markov"), 0.0, std::string("skipped"));
    checks.row(std::string("nested_monotonicity"), 0.0, std::string("skipped"));
  }
  if (D.interior_index(step)) {
    const auto er = eps_ratio(D, K, x, step);
    results["eps_ratio"] = {{"y", to_string(step, dim)},
                            {"value", num(er.value)},
                            {"witness", to_string(er.witness, dim)},
                            {"harnack_min", num(er.harnack_min)},
                            {"harnack_max", num(er.harnack_max)},
                            {"restricted", er.restricted}};
  }

  if (D.has_faces()) {
    const auto sm = side_masses(D, K, x);
    json faces = json::object();
    for (std::size_t i = 0; i < sm.names.size(); ++i) faces[sm.names[i]] = num(sm.mass[i]);
    results["side_masses"] = faces;
    checks.row(std::string("side_mass_positive"), sm.min_mass, std::string(sm.min_mass > 0 ? "pass" : "fail"));
  }
  if (spec.rfind("strip:", 0) == 0) {
    const auto body = spec.substr(6);
    const auto xpos = body.find('x'), colon = body.find(':');
    const int s = std::stoi(body.substr(0, xpos));
    const int period = std::stoi(body.substr(xpos + 1, colon - xpos - 1));
    const int n = std::stoi(body.substr(colon + 1));
    if (n >= 1) {
      const auto tp = tile_product(s, period, n);
      json factors = json::array(), steps = json::array();
      for (auto f : tp.factors) factors.push_back(num(f));
      for (auto f : tp.step_eps) steps.push_back(num(f));
      results["tile_product"] = {{"direct", num(tp.direct)},     {"factors", factors},
                                 {"step_eps", steps},            {"end_mass", num(tp.end_mass)},
                                 {"product", num(tp.product)},   {"base_side_min", num(tp.base_side_min)}};
      check("tile_product", tp.residual, 1e-10);
    }
  }

  const auto paths = static_cast<std::uint64_t>(c.integer("grid", "paths"));
  const auto seed = static_cast<std::uint64_t>(c.integer("run", "seed"));
  const auto mc = mc_exit_sampler(D, K, x, seed, paths);
  const double tol = std::sqrt(static_cast<double>(D.boundary().size()) / static_cast<double>(paths));
  check("mc_total_variation", mc.tv, tol);

  ctx.bundle.files["checks.csv"] = checks.out.str();
  const auto row = K.row(D, x);
  json exit_row = json::object();
  std::vector<std::pair<double, double>> curve;
  for (std::size_t b = 0; b < row.size(); ++b) {
    if (row[b] != 0.0) exit_row[to_string(D.boundary()[b], dim)] = num(row[b]);
    curve.emplace_back(static_cast<double>(b), row[b]);
  }
  add_series(ctx.report, "exit", "boundary_index", "eps_x(b)", curve);
  results["from"] = to_string(x, dim);
  results["exit_row"] = exit_row;
  results["interior_points"] = D.interior().size();
  results["boundary_points"] = D.boundary().size();
  results["mc_tv"] = num(mc.tv);
  ctx.report["results"] = results;
  ctx.report["provenance"] = {{"domain", spec},
                              {"seed", seed},
                              {"paths", paths},
                              {"rng", "splitmix64 counter stream per path"},
                              {"solver", "sparse LU, row-major interior order"}};
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const std::vector<ParamSpec>& config_schema() {
  static const auto schema = build_schema();
  return schema;
}

const ParamSpec* find_param(std::string_view section, std::string_view key) {
  for (const auto& p : config_schema())
    if (p.section == section && p.key == key) return &p;
  return nullptr;
}

ScenarioConfig ScenarioConfig::for_scenario(std::string scenario) {
  ScenarioConfig c;
  c.set("run", "scenario", scenario);
  return c;
}

void ScenarioConfig::set(std::string_view section, std::string_view key, std::string_view value) {
  if (section == "run" && key == "scenario") {
    const auto name = std::string(trim(value));
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw UsageError("[run] scenario: unknown scenario '" + name + "'");
    if (!scenario_.empty() && scenario_ != name) {
      for (const auto& [sec, _] : values_)
        if (sec != "run") throw UsageError("[run] scenario '" + name + "' conflicts with section [" + sec + "]");
    }
    scenario_ = name;
    values_["run"]["scenario"] = name;
    return;
  }
  const auto* spec = find_param(section, key);
  if (!spec) throw UsageError("unknown config key [" + std::string(section) + "] " + std::string(key));
  if (section != "run") {
    if (scenario_.empty()) scenario_ = std::string(section);
    if (section != scenario_)
      throw UsageError("section [" + std::string(section) + "] does not match scenario '" + scenario_ + "'");
  }
  values_[std::string(section)][std::string(key)] = canonical(*spec, value);
}

void ScenarioConfig::finalize() {
  if (values_["run"].count("scenario") == 0) throw UsageError("config does not name a scenario ([run] scenario)");
  for (const auto& p : config_schema()) {
    if (p.section != "run" && p.section != scenario_) continue;
    auto& sec = values_[p.section];
    if (sec.count(p.key) == 0 && !(p.section == "run" && p.key == "scenario")) sec[p.key] = canonical(p, p.fallback);
  }
}

ScenarioConfig ScenarioConfig::parse(std::istream& in) {
  CLI::ConfigINI ini;
  std::vector<CLI::ConfigItem> items;
  try {
    items = ini.from_config(in);
  } catch (const CLI::Error& e) {
    throw UsageError(std::string("cannot parse config: ") + e.what());
  }
  ScenarioConfig c;
  std::vector<std::pair<std::string, CLI::ConfigItem>> deferred;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (item.parents.size() > 1) throw UsageError("nested config sections are not supported");
    std::string section = item.parents.empty() ? "run" : item.parents.front();
    if (section == "default") section = "run";
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
    if (section == "run" && item.name == "scenario")
      c.set(section, item.name, value);
    else
      deferred.emplace_back(section, CLI::ConfigItem{item.parents, item.name, {value}});
  }
  for (const auto& [section, item] : deferred) c.set(section, item.name, item.inputs.front());
  c.finalize();
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  return parse(in);
}

std::string ScenarioConfig::text(std::string_view section, std::string_view key) const {
  auto s = values_.find(std::string(section));
  if (s != values_.end()) {
    auto v = s->second.find(std::string(key));
    if (v != s->second.end()) return v->second;
  }
  const auto* spec = find_param(section, key);
  if (!spec) throw UsageError("unknown config key [" + std::string(section) + "] " + std::string(key));
  return canonical(*spec, spec->fallback);
}

long ScenarioConfig::integer(std::string_view section, std::string_view key) const {
  return std::stol(text(section, key));
}

double ScenarioConfig::real(std::string_view section, std::string_view key) const {
  return std::stod(text(section, key));
}

bool ScenarioConfig::boolean(std::string_view section, std::string_view key) const {
  return text(section, key) == "true";
}

std::string ScenarioConfig::render() const {
  std::ostringstream out;
  std::string current;
  for (const auto& p : config_schema()) {
    if (p.section != "run" && p.section != scenario_) continue;
    if (p.section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << p.section << "]\n";
      current = p.section;
    }
    out << p.key << " = " << text(p.section, p.key) << '\n';
  }
  return out.str();
}

bool ReportBundle::has_series() const {
  auto it = files.find("report.json");
  if (it == files.end()) return false;
  const auto report = json::parse(it->second);
  return report.contains("series") && !report["series"].empty();
}

ReportBundle run_scenario(const ScenarioConfig& config) {
  if (config.scenario().empty()) throw UsageError("config does not name a scenario");
  Context ctx{config, nullptr, std::nullopt, json::object(), {}};
  const auto& s = config.scenario();
  if (s != "grid") {
    ctx.model = parse_model_spec(config.text("run", "model"));
    ctx.mu = parse_measure_spec(ctx.model, config.text("run", "measure"));
  }
  if (s == "growth")
    run_growth(ctx);
  else if (s == "green")
    run_green(ctx);
  else if (s == "martin")
    run_martin(ctx);
  else if (s == "deviation")
    run_deviation(ctx);
  else if (s == "obstruct")
    run_obstruct(ctx);
  else
    run_grid(ctx);

  ctx.report["schema_version"] = kSchemaVersion;
  ctx.report["scenario"] = s;
  json echo = json::object();
  for (const auto& p : config_schema())
    if (p.section == "run" || p.section == s) echo[p.section][p.key] = config.text(p.section, p.key);
  ctx.report["config"] = echo;
  if (s != "grid") {
    ctx.report["model"] = ctx.model->spec();
    ctx.report["measure"] = config.text("run", "measure");
  }
  ctx.bundle.files["report.json"] = ctx.report.dump(2) + "\n";
  ctx.bundle.files["config.ini"] = config.render();
  return std::move(ctx.bundle);
}

std::map<std::string, std::string> emit_plotdata(const ReportBundle& bundle) {
  auto it = bundle.files.find("report.json");
  if (it == bundle.files.end()) throw UsageError("bundle has no report.json");
  const auto report = json::parse(it->second);
  if (!report.contains("series") || report["series"].empty()) throw UsageError("bundle contains no series to plot");
  std::map<std::string, std::string> out;
  for (const auto& [name, series] : report["series"].items()) {
    std::ostringstream csv;
    csv << series["x"].get<std::string>() << ',' << series["y"].get<std::string>() << '\n';
    for (const auto& pt : series["points"]) {
      for (std::size_t k = 0; k < 2; ++k) {
        if (k) csv << ',';
        if (pt[k].is_string())
          csv << pt[k].get<std::string>();
        else
          csv << format_number(pt[k].get<double>());
      }
      csv << '\n';
    }
    out[series["file"].get<std::string>()] = csv.str();
  }
  return out;
}

void write_bundle(const ReportBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : bundle.files) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ExitCode::internal, "cannot write " + (dir / name).string());
    out << content;
  }
}

}  // namespace lv
