#include <doctest.h>
#include <omp.h>

#include <filesystem>
#include <fstream>

#include "liouville/errors.hpp"
#include "liouville/gridlab.hpp"
#include "oracles.hpp"

using namespace lv::grid;

namespace {

// Compares the sparse solver against dense elimination, point lists included.
void check_against_dense(const GridDomain& d) {
  std::vector<oracle::Cell> cells;
  for (const auto& c : d.cells()) cells.push_back({c.x, c.y});
  const auto ref = oracle::dense_exit(d.dim(), cells, d.period());
  REQUIRE(ref.interior.size() == d.interior().size());
  REQUIRE(ref.boundary.size() == d.boundary().size());
  for (std::size_t i = 0; i < ref.interior.size(); ++i)
    CHECK((ref.interior[i] == oracle::Cell{d.interior()[i].x, d.interior()[i].y}));
  for (std::size_t b = 0; b < ref.boundary.size(); ++b)
    CHECK((ref.boundary[b] == oracle::Cell{d.boundary()[b].x, d.boundary()[b].y}));
  const auto K = exit_kernel(d);
  double worst = 0;
  for (std::size_t i = 0; i < K.rows(); ++i)
    for (std::size_t b = 0; b < K.cols(); ++b) worst = std::max(worst, std::abs(K(i, b) - ref.eps[i][b]));
  CHECK(worst < 1e-12);
  CHECK(K.stochasticity_defect() < 1e-12);
}

}  // namespace

TEST_CASE("exit kernels agree with dense elimination") {
  check_against_dense(GridDomain::interval(7));
  check_against_dense(GridDomain::rectangle(5, 5));
  check_against_dense(GridDomain::rectangle(4, 3, 2, -1));
  check_against_dense(GridDomain::tile(4));
  check_against_dense(GridDomain::strip(3, 4, 1));
  check_against_dense(GridDomain::from_mask("#####\n#####\n##.##\n#####\n#####\n"));
}

TEST_CASE("gambler's ruin") {
  for (int n : {2, 5, 13}) {
    const auto d = GridDomain::interval(n);
    const auto K = exit_kernel(d);
    const auto right = *d.boundary_index({n, 0});
    for (std::size_t i = 0; i < d.interior().size(); ++i)
      CHECK(K(i, right) == doctest::Approx(static_cast<double>(d.interior()[i].x) / n).epsilon(1e-13));
  }
  CHECK_THROWS_AS(GridDomain::interval(1), lv::UsageError);
}

TEST_CASE("domain construction") {
  const auto r = GridDomain::rectangle(5, 5);
  CHECK(r.cells().size() == 36);
  CHECK(r.interior().size() == 16);
  CHECK((r.center() == Point{2, 2}));
  CHECK((GridDomain::rectangle(4, 4).center() == Point{2, 2}));
  CHECK((parse_point(r, "center") == Point{2, 2}));
  CHECK((parse_point(r, "3,1") == Point{3, 1}));
  CHECK_THROWS_AS(parse_point(r, "3;1"), lv::UsageError);

  const auto t = GridDomain::tile(4);
  CHECK(t.face_names() == std::vector<std::string>{"bottom", "top", "left", "right"});
  const auto s = GridDomain::strip(4, 6, 2);
  CHECK(s.period() == 6);
  CHECK(s.face_names().front() == "C_-2 (left end)");
  CHECK(s.face_names().back() == "C_2 (right end)");
  CHECK((s.normalize({0, 7}) == Point{0, 1}));

  CHECK(parse_domain_spec("rectangle:3x2@1,1").cells().size() == 12);
  CHECK(parse_domain_spec("interval:4").dim() == 1);
  CHECK_THROWS_AS(parse_domain_spec("disc:3"), lv::UsageError);
  CHECK_THROWS_AS(parse_domain_spec("rectangle:3"), lv::UsageError);

  const auto dir = std::filesystem::temp_directory_path() / "lv_grid_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "mask.txt") << "####\n####\n####\n";
  const auto m = parse_domain_spec("mask:" + (dir / "mask.txt").string());
  CHECK(m.interior().size() == 2);
  CHECK_THROWS_AS(parse_domain_spec("mask:" + (dir / "none.txt").string()), lv::UsageError);
}

TEST_CASE("harmonic extension and mean value") {
  const auto d = GridDomain::from_mask("######\n######\n###.##\n######\n######\n");
  const auto K = exit_kernel(d);
  std::vector<double> f;
  for (const auto& b : d.boundary()) f.push_back(std::sin(b.x) + b.y * b.y);
  const auto u = harmonic_extension(d, K, f);
  CHECK(mean_value_residual(d, u, f) < 1e-12);
  std::vector<double> linear;
  for (const auto& b : d.boundary()) linear.push_back(2.0 * b.x - b.y);
  const auto v = harmonic_extension(d, K, linear);
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(v[i] == doctest::Approx(2.0 * d.interior()[i].x - d.interior()[i].y).epsilon(1e-12));
  const std::vector<double> wrong(3, 0.0);
  CHECK_THROWS_AS(harmonic_extension(d, K, wrong), lv::UsageError);
}

TEST_CASE("nested domains") {
  const auto outer = GridDomain::rectangle(8, 6);
  const auto inner = GridDomain::rectangle(5, 4, 1, 1);
  const Point x{3, 3}, y{4, 3};
  CHECK(smp_check(inner, outer, x) < 1e-12);
  const auto mono = nested_monotonicity(inner, outer, x, y);
  CHECK(mono.holds);
  CHECK(mono.outer <= mono.inner + 1e-10);
  CHECK_THROWS_AS(require_nested(outer, inner), lv::UsageError);
  CHECK_THROWS_AS(smp_check(GridDomain::rectangle(5, 4, 5, 5), outer, x), lv::UsageError);
}

TEST_CASE("exit ratios and side masses") {
  const auto t = GridDomain::tile(4);
  const auto same = eps_ratio(t, t.center(), t.center());
  CHECK(same.value == 0.0);
  const auto shifted = eps_ratio(t, {2, 2}, {3, 2});
  CHECK(shifted.value > 0.0);
  CHECK(shifted.harnack_min <= 1.0);
  CHECK(shifted.harnack_max >= 1.0);
  const auto sm = side_masses(t, t.center());
  for (double m : sm.mass) CHECK(m == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(sm.min_mass == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("tile products telescope") {
  for (int n : {1, 2, 3}) {
    const auto tp = tile_product(4, 6, n);
    CHECK(tp.n == n);
    CHECK(tp.factors.size() == static_cast<std::size_t>(n));
    CHECK(tp.residual < 1e-10);
    CHECK(tp.direct > 0.0);
    CHECK(tp.base_side_min > 0.0);
  }
}

TEST_CASE("Monte Carlo exit sampler") {
  const auto d = GridDomain::rectangle(5, 5);
  const auto K = exit_kernel(d);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = mc_exit_sampler(d, K, d.center(), 42, 20000);
  omp_set_num_threads(3);
  const auto b = mc_exit_sampler(d, K, d.center(), 42, 20000);
  omp_set_num_threads(saved);
  CHECK(a.counts == b.counts);
  std::uint64_t total = 0;
  for (auto c : a.counts) total += c;
  CHECK(total == 20000);
  CHECK(a.tv < 0.05);
  CHECK(mc_exit_sampler(d, K, d.center(), 43, 20000).counts != a.counts);
  CHECK_THROWS_AS(mc_exit_sampler(d, K, d.center(), 1, 0), lv::UsageError);
  CHECK_THROWS_AS(mc_exit_sampler(d, K, {0, 0}, 1, 10), lv::UsageError);
}
