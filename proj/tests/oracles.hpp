#pragma once
// Reference implementations used only by the tests. None of them share code
// with the library: words are reduced with a stack, the Heisenberg and
// Baumslag-Solitar groups act by explicit matrices, the lamplighter keeps a
// set of lit lamps, and Dirichlet problems are solved by dense elimination.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

// Free group: letters a..z, inverse is the other case.
inline std::string free_reduce(const std::string& word) {
  std::string out;
  for (char c : word) {
    if (c == 'e') continue;
    const char inv = std::islower(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c))
                                                                 : static_cast<char>(std::tolower(c));
    if (!out.empty() && out.back() == inv)
      out.pop_back();
    else
      out.push_back(c);
  }
  return out;
}

inline std::string free_inverse(const std::string& text) {
  const auto word = free_reduce(text);
  std::string out;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    const char c = *it;
    out.push_back(std::islower(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c))
                                                              : static_cast<char>(std::tolower(c)));
  }
  return out;
}

inline int free_length(const std::string& word) { return static_cast<int>(free_reduce(word).size()); }

// Busemann function of the free group towards the end u^infinity,
// beta(x) = lim |u^n| - |x^-1 u^n|.
inline int free_busemann(const std::string& x, const std::string& u, int n = 40) {
  std::string un;
  for (int i = 0; i < n; ++i) un += u;
  return free_length(un) - free_length(free_inverse(x) + un);
}

// Green function of simple random walk on the free group of rank r from the
// tree first-passage recursion. F = P(ever hit a fixed neighbour) solves
// F = 1/q + (q-1)/q F^2 with q = 2r; iterating from 0 converges to the
// smallest root. Then U = F is the return probability, g(e,e) = 1/(1-U) and
// each step away multiplies by F.
inline double tree_green(int rank, int length) {
  const double q = 2.0 * rank;
  double F = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double next = 1.0 / q + (q - 1.0) / q * F * F;
    if (next == F) break;
    F = next;
  }
  return std::pow(F, length) / (1.0 - F);
}

// Closed form of the same quantity, (2r-1)/(2r-2) (2r-1)^-|x|.
inline double tree_green_closed(int rank, int length) {
  const double q = 2.0 * rank - 1.0;
  return q / (q - 1.0) * std::pow(q, -length);
}

// Z^d with letters a,b,c,... and inverses A,B,C,...
inline std::vector<long> abelian(const std::string& word, int dim) {
  std::vector<long> v(static_cast<std::size_t>(dim), 0);
  for (char c : word) {
    if (c == 'e') continue;
    const int i = std::tolower(static_cast<unsigned char>(c)) - 'a';
    v.at(static_cast<std::size_t>(i)) += std::islower(static_cast<unsigned char>(c)) ? 1 : -1;
  }
  return v;
}

// Heisenberg group as upper unitriangular 3x3 integer matrices.
using Mat3 = std::array<std::array<long, 3>, 3>;

inline Mat3 mat_mul(const Mat3& x, const Mat3& y) {
  Mat3 z{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) z[i][j] += x[i][k] * y[k][j];
  return z;
}

inline Mat3 heisenberg(const std::string& word) {
  Mat3 m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (char c : word) {
    Mat3 g{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    switch (c) {
      case 'a': g[0][1] = 1; break;
      case 'A': g[0][1] = -1; break;
      case 'b': g[1][2] = 1; break;
      case 'B': g[1][2] = -1; break;
      case 'e': continue;
      default: throw std::invalid_argument("heisenberg letter");
    }
    m = mat_mul(m, g);
  }
  return m;
}

// (x, y, z) coordinates of a Heisenberg matrix [[1,x,z],[0,1,y],[0,0,1]].
inline std::string heisenberg_coords(const Mat3& m) {
  return "(" + std::to_string(m[0][1]) + "," + std::to_string(m[1][2]) + "," + std::to_string(m[0][2]) + ")";
}

// Lamplighter Z/2 wr Z: t moves the cursor right, T left, a toggles the lamp
// under the cursor.
struct Lamps {
  std::set<long> lit;
  long cursor = 0;
  friend bool operator==(const Lamps&, const Lamps&) = default;
  friend bool operator<(const Lamps& x, const Lamps& y) {
    return x.cursor != y.cursor ? x.cursor < y.cursor : x.lit < y.lit;
  }
};

inline Lamps lamplighter(const std::string& word) {
  Lamps s;
  for (char c : word) {
    switch (c) {
      case 't': ++s.cursor; break;
      case 'T': --s.cursor; break;
      case 'a':
        if (!s.lit.erase(s.cursor)) s.lit.insert(s.cursor);
        break;
      case 'e': break;
      default: throw std::invalid_argument("lamplighter letter");
    }
  }
  return s;
}

// Exact rationals for the Baumslag-Solitar matrices.
struct Rational {
  long long num = 0;
  long long den = 1;
  Rational(long long n = 0, long long d = 1) : num(n), den(d) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  friend Rational operator+(const Rational& x, const Rational& y) {
    return Rational(x.num * y.den + y.num * x.den, x.den * y.den);
  }
  friend Rational operator*(const Rational& x, const Rational& y) { return Rational(x.num * y.num, x.den * y.den); }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& x, const Rational& y) { return x.num * y.den < y.num * x.den; }
};

// BS(1,m) as affine matrices [[m^k, beta], [0, 1]]: a = [[1,1],[0,1]],
// t = [[m,0],[0,1]], so t a t^-1 = a^m.
struct Affine {
  Rational scale{1};
  Rational shift{0};
  friend bool operator==(const Affine&, const Affine&) = default;
  friend bool operator<(const Affine& x, const Affine& y) {
    return x.scale == y.scale ? x.shift < y.shift : x.scale < y.scale;
  }
};

inline Affine affine_mul(const Affine& x, const Affine& y) { return {x.scale * y.scale, x.scale * y.shift + x.shift}; }

inline Affine baumslag_solitar(const std::string& word, long long m) {
  Affine out;
  for (char c : word) {
    Affine g;
    switch (c) {
      case 'a': g.shift = Rational(1); break;
      case 'A': g.shift = Rational(-1); break;
      case 't': g.scale = Rational(m); break;
      case 'T': g.scale = Rational(1, m); break;
      case 'e': continue;
      default: throw std::invalid_argument("bs letter");
    }
    out = affine_mul(out, g);
  }
  return out;
}

// All words of length k over `alphabet`, grouped by `canon`. Each class keeps
// its path count and the first word that reached it.
struct PathClass {
  long long count = 0;
  std::string word;
};

template <typename Canon>
auto count_paths(const std::string& alphabet, int k, Canon canon) {
  using K = decltype(canon(std::string{}));
  std::map<K, PathClass> counts;
  std::string word(static_cast<std::size_t>(k), ' ');
  std::vector<std::size_t> digits(static_cast<std::size_t>(k), 0);
  while (true) {
    for (std::size_t i = 0; i < digits.size(); ++i) word[i] = alphabet[digits[i]];
    auto& c = counts[canon(word)];
    if (c.count++ == 0) c.word = word;
    int i = k - 1;
    while (i >= 0 && ++digits[static_cast<std::size_t>(i)] == alphabet.size()) digits[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
  }
  return counts;
}

// Dense Gauss-Jordan elimination with partial pivoting; solves A X = B in place.
inline void dense_solve(std::vector<std::vector<double>>& A, std::vector<std::vector<double>>& B) {
  const std::size_t n = A.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    std::swap(A[c], A[p]);
    std::swap(B[c], B[p]);
    const double d = A[c][c];
    for (auto& v : A[c]) v /= d;
    for (auto& v : B[c]) v /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || A[r][c] == 0.0) continue;
      const double f = A[r][c];
      for (std::size_t j = 0; j < n; ++j) A[r][j] -= f * A[c][j];
      for (std::size_t j = 0; j < B[r].size(); ++j) B[r][j] -= f * B[c][j];
    }
  }
}

struct Cell {
  int x = 0, y = 0;
  friend bool operator<(const Cell& p, const Cell& q) { return p.y != q.y ? p.y < q.y : p.x < q.x; }
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Exit distributions of simple random walk on a finite cell set (dim 1 or 2,
// optional period in y). Returns interior cells, boundary cells and the
// matrix eps[i][b], all in (y, x) order.
struct DenseExit {
  std::vector<Cell> interior, boundary;
  std::vector<std::vector<double>> eps;
};

inline DenseExit dense_exit(int dim, std::vector<Cell> cells, int period = 0) {
  auto norm = [&](Cell c) {
    if (period > 0) c.y = ((c.y % period) + period) % period;
    return c;
  };
  std::set<Cell> all;
  for (auto& c : cells) all.insert(norm(c));
  auto neighbours = [&](Cell c) {
    std::vector<Cell> out{norm({c.x + 1, c.y}), norm({c.x - 1, c.y})};
    if (dim == 2) {
      out.push_back(norm({c.x, c.y + 1}));
      out.push_back(norm({c.x, c.y - 1}));
    }
    return out;
  };
  DenseExit out;
  for (const auto& c : all) {
    bool inside = true;
    for (const auto& n : neighbours(c)) inside = inside && all.count(n);
    (inside ? out.interior : out.boundary).push_back(c);
  }
  std::map<Cell, std::size_t> ii, bi;
  for (std::size_t i = 0; i < out.interior.size(); ++i) ii[out.interior[i]] = i;
  for (std::size_t i = 0; i < out.boundary.size(); ++i) bi[out.boundary[i]] = i;
  const std::size_t n = out.interior.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> B(n, std::vector<double>(out.boundary.size(), 0.0));
  const double w = 1.0 / (2.0 * dim);
  for (std::size_t i = 0; i < n; ++i) {
    A[i][i] = 1.0;
    for (const auto& nb : neighbours(out.interior[i])) {
      if (auto it = ii.find(nb); it != ii.end())
        A[i][it->second] -= w;
      else
        B[i][bi.at(nb)] += w;
    }
  }
  dense_solve(A, B);
  out.eps = std::move(B);
  return out;
}

}  // namespace oracle
