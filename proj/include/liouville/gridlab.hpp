#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lv::grid {

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Row-major order: by y, then x.
struct RowMajor {
  bool operator()(const Point& a, const Point& b) const noexcept { return a.y != b.y ? a.y < b.y : a.x < b.x; }
};

std::string to_string(const Point& p, int dim);

/// Finite set of lattice cells in Z or Z^2 with its interior/boundary split.
/// A cell is interior when all 2*dim lattice neighbours are cells. With
/// `period > 0` the y coordinate is read modulo period (a cylinder).
class GridDomain {
 public:
  /// Labels for boundary cells; `face_of` maps a boundary cell to a label
  /// index or -1.
  struct Faces {
    std::vector<std::string> names;
    std::map<Point, int, RowMajor> face_of;
  };

  static GridDomain from_cells(int dim, std::vector<Point> cells, int period = 0, Faces faces = {});
  /// Cells 0..n on the line.
  static GridDomain interval(int n);
  /// Lattice points [x0, x0+w] x [y0, y0+h].
  static GridDomain rectangle(int w, int h, int x0 = 0, int y0 = 0);
  /// [0,s]^2 with faces bottom, top, left, right; corners go to bottom/top.
  static GridDomain tile(int s);
  /// Union of translates of `tile`; a boundary cell is labelled C_i for the
  /// first translate i whose tile contains it.
  static GridDomain union_of_tiles(const GridDomain& tile, const std::vector<Point>& translates);
  /// Cylinder of tiles [h s, (h+1) s] x (Z mod period) for h = -n..n, the
  /// deck group Z acting by horizontal shifts. Faces C_-n (left end column)
  /// and C_n (right end column).
  static GridDomain strip(int s, int period, int n);
  /// Text grid, '#' for a cell and '.' for a hole; the first line is y = 0.
  static GridDomain from_mask(std::string_view text);
  static GridDomain load_mask(const std::string& path);

  int dim() const noexcept { return dim_; }
  int period() const noexcept { return period_; }
  const std::vector<Point>& cells() const noexcept { return cells_; }
  const std::vector<Point>& interior() const noexcept { return interior_; }
  const std::vector<Point>& boundary() const noexcept { return boundary_; }
  const std::vector<std::string>& face_names() const noexcept { return face_names_; }
  /// Face label index per boundary cell (-1 when unlabelled).
  const std::vector<int>& boundary_face() const noexcept { return boundary_face_; }
  bool has_faces() const noexcept { return !face_names_.empty(); }

  bool contains(Point p) const { return cell_index_.count(normalize(p)) > 0; }
  std::optional<std::size_t> interior_index(Point p) const;
  std::optional<std::size_t> boundary_index(Point p) const;
  std::vector<Point> neighbors(Point p) const;
  Point normalize(Point p) const;
  /// Default start point: the interior cell closest to the bounding-box
  /// centre (floor), ties in row-major order.
  Point center() const;

 private:
  int dim_ = 1;
  int period_ = 0;
  std::vector<Point> cells_;
  std::map<Point, std::size_t, RowMajor> cell_index_;
  std::vector<Point> interior_;
  std::vector<Point> boundary_;
  std::map<Point, std::size_t, RowMajor> interior_index_;
  std::map<Point, std::size_t, RowMajor> boundary_index_;
  std::vector<std::string> face_names_;
  std::vector<int> boundary_face_;
};

/// "interval:10", "rectangle:5x5", "rectangle:5x5@2,3", "tile:4",
/// "strip:4x6:3" (tile width, period, tiles each side), "mask:<path>".
GridDomain parse_domain_spec(std::string_view spec);
/// "5", "2,3", or "center".
Point parse_point(const GridDomain& domain, std::string_view text);

/// Exit distributions of simple random walk, one row per interior cell in
/// row-major order, one column per boundary cell.
class ExitKernel {
 public:
  ExitKernel(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), mass_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t b) { return mass_[i * cols_ + b]; }
  double operator()(std::size_t i, std::size_t b) const { return mass_[i * cols_ + b]; }
  /// Row for any cell: boundary cells exit at once.
  std::vector<double> row(const GridDomain& domain, Point p) const;
  /// Largest |row sum - 1|.
  double stochasticity_defect() const;

 private:
  std::size_t rows_, cols_;
  std::vector<double> mass_;
};

/// Direct sparse LU solve of the discrete Dirichlet problem with boundary
/// data delta_b for every boundary cell b.
ExitKernel exit_kernel(const GridDomain& domain);

/// f(x) = sum_b eps_x(b) f(b), with `boundary_values` in boundary order.
std::vector<double> harmonic_extension(const GridDomain& domain, const ExitKernel& kernel,
                                       const std::vector<double>& boundary_values);
/// Largest |f(x) - mean of f over the neighbours of x| over interior x.
double mean_value_residual(const GridDomain& domain, const std::vector<double>& interior_values,
                           const std::vector<double>& boundary_values);

/// D1 must be contained in D2 (cells and interior).
void require_nested(const GridDomain& inner, const GridDomain& outer);

/// max over b in dD2 of |eps^D2_x(b) - sum_{z in dD1} eps^D2_z(b) eps^D1_x(z)|.
double smp_check(const GridDomain& inner, const GridDomain& outer, Point x);

struct EpsRatio {
  double value = 0.0;
  Point witness;
  double harnack_min = 0.0;
  double harnack_max = 0.0;
  bool restricted = false;  // some b has eps_y(b) = 0 < eps_x(b)
};

/// max over b of |eps_x(b)/eps_y(b) - 1| with its witness and the range of
/// the ratio. Boundary points carrying no mass from either start are skipped.
EpsRatio eps_ratio(const GridDomain& domain, const ExitKernel& kernel, Point x, Point y);
EpsRatio eps_ratio(const GridDomain& domain, Point x, Point y);

struct Monotonicity {
  bool holds = false;
  double inner = 0.0;
  double outer = 0.0;
};

/// eps(D2; x, y) <= eps(D1; x, y) + 1e-10 for nested D1 in D2.
Monotonicity nested_monotonicity(const GridDomain& inner, const GridDomain& outer, Point x, Point y);

struct SideMasses {
  std::vector<std::string> names;
  std::vector<double> mass;
  double min_mass = 0.0;
};

SideMasses side_masses(const GridDomain& domain, const ExitKernel& kernel, Point x);
SideMasses side_masses(const GridDomain& domain, Point x);

/// Product decomposition of eps_x^{K_n}(C_n) on a strip along the tile
/// geodesic x_i = x + i s, with x the centre of the base tile.
struct TileProduct {
  int n = 0;
  double direct = 0.0;              // eps_x(C_n)
  std::vector<double> factors;      // eps_{x_i}(C_n) / eps_{x_{i+1}}(C_n)
  std::vector<double> step_eps;     // eps(K_n; x_i, x_{i+1})
  double end_mass = 0.0;            // eps_{hx}(C_n)
  double product = 0.0;             // prod factors * end_mass
  double residual = 0.0;            // |product - direct| / direct
  double base_side_min = 0.0;       // min over sides C of the base tile of eps_x^F(C)
};

TileProduct tile_product(int s, int period, int n);

struct McResult {
  std::uint64_t paths = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> counts;  // per boundary cell
  std::vector<double> empirical;
  double tv = 0.0;                    // total variation to the exact row
};

/// Simple random walk paths from x until the boundary is hit. Path i draws
/// its steps from a counter-based SplitMix64 stream keyed by (seed, i), so
/// the counts do not depend on thread count or scheduling.
McResult mc_exit_sampler(const GridDomain& domain, const ExitKernel& kernel, Point x, std::uint64_t seed,
                         std::uint64_t paths);
McResult mc_exit_sampler(const GridDomain& domain, Point x, std::uint64_t seed, std::uint64_t paths);

}  // namespace lv::grid
