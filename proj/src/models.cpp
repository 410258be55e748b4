#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "liouville/errors.hpp"
#include "liouville/group.hpp"
#include "liouville/keys.hpp"

namespace lv {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw ResourceError("integer overflow in group arithmetic", -1);
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw ResourceError("integer overflow in group arithmetic", -1);
  return r;
}

std::int64_t checked_pow(std::int64_t base, std::int64_t exp) {
  std::int64_t r = 1;
  for (std::int64_t i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

std::string letter_name(int i, bool inverse) {
  const char c = static_cast<char>((inverse ? 'A' : 'a') + i);
  return std::string(1, c);
}

// ---------------------------------------------------------------------------
// Free group: freely reduced words, one byte per letter (2i = x_i, 2i+1 = x_i^-1).

class FreeGroup final : public GroupModel {
 public:
  explicit FreeGroup(int rank) : rank_(rank) {
    std::vector<Generator> gens;
    for (int i = 0; i < rank; ++i) {
      gens.push_back({letter_name(i, false), Key(1, static_cast<char>(2 * i)),
                      static_cast<std::size_t>(2 * i + 1)});
      gens.push_back({letter_name(i, true), Key(1, static_cast<char>(2 * i + 1)),
                      static_cast<std::size_t>(2 * i)});
    }
    set_generators(std::move(gens));
  }

  ModelKind kind() const noexcept override { return ModelKind::free_group; }
  std::string spec() const override { return "free:" + std::to_string(rank_); }
  Key identity_key() const override { return {}; }

  Key multiply(std::string_view g, std::string_view h) const override {
    Key out(g);
    std::size_t j = 0;
    while (!out.empty() && j < h.size() && (out.back() ^ 1) == h[j]) {
      out.pop_back();
      ++j;
    }
    out.append(h.substr(j));
    return out;
  }

  Key invert(std::string_view g) const override {
    Key out(g.rbegin(), g.rend());
    for (auto& c : out) c = static_cast<char>(c ^ 1);
    return out;
  }

  std::string describe(std::string_view g) const override {
    if (g.empty()) return "e";
    std::string out;
    for (char c : g) out += generators()[static_cast<std::uint8_t>(c)].name;
    return out;
  }

  int virtual_abelian_rank() const noexcept override { return rank_ <= 1 ? rank_ : -1; }

 private:
  int rank_;
};

// ---------------------------------------------------------------------------

class FreeAbelian final : public GroupModel {
 public:
  explicit FreeAbelian(int dim) : dim_(dim) {
    std::vector<Generator> gens;
    for (int i = 0; i < dim; ++i) {
      std::vector<std::int64_t> up(dim, 0), down(dim, 0);
      up[i] = 1;
      down[i] = -1;
      gens.push_back({letter_name(i, false), keys::encode_ints(up), static_cast<std::size_t>(2 * i + 1)});
      gens.push_back({letter_name(i, true), keys::encode_ints(down), static_cast<std::size_t>(2 * i)});
    }
    set_generators(std::move(gens));
  }

  ModelKind kind() const noexcept override { return ModelKind::free_abelian; }
  std::string spec() const override { return "abelian:" + std::to_string(dim_); }
  Key identity_key() const override { return keys::encode_ints(std::vector<std::int64_t>(dim_, 0)); }

  Key multiply(std::string_view g, std::string_view h) const override {
    std::string out;
    for (int i = 0; i < dim_; ++i) keys::put_int(out, checked_add(keys::take_int(g), keys::take_int(h)));
    return out;
  }

  Key invert(std::string_view g) const override {
    std::string out;
    for (int i = 0; i < dim_; ++i) keys::put_int(out, -keys::take_int(g));
    return out;
  }

  std::string describe(std::string_view g) const override {
    std::string out = "(";
    for (int i = 0; i < dim_; ++i) {
      if (i) out += ",";
      out += std::to_string(keys::take_int(g));
    }
    return out + ")";
  }

  int virtual_abelian_rank() const noexcept override { return dim_; }

 private:
  int dim_;
};

// ---------------------------------------------------------------------------

class Heisenberg final : public GroupModel {
 public:
  Heisenberg() {
    set_generators({{"a", keys::encode_ints({1, 0, 0}), 1},
                    {"A", keys::encode_ints({-1, 0, 0}), 0},
                    {"b", keys::encode_ints({0, 1, 0}), 3},
                    {"B", keys::encode_ints({0, -1, 0}), 2}});
  }

  ModelKind kind() const noexcept override { return ModelKind::heisenberg; }
  std::string spec() const override { return "heisenberg"; }
  Key identity_key() const override { return keys::encode_ints({0, 0, 0}); }

  Key multiply(std::string_view g, std::string_view h) const override {
    const auto x1 = keys::take_int(g), y1 = keys::take_int(g), z1 = keys::take_int(g);
    const auto x2 = keys::take_int(h), y2 = keys::take_int(h), z2 = keys::take_int(h);
    return keys::encode_ints(
        {checked_add(x1, x2), checked_add(y1, y2), checked_add(checked_add(z1, z2), checked_mul(x1, y2))});
  }

  Key invert(std::string_view g) const override {
    const auto x = keys::take_int(g), y = keys::take_int(g), z = keys::take_int(g);
    return keys::encode_ints({-x, -y, checked_add(-z, checked_mul(x, y))});
  }

  std::string describe(std::string_view g) const override {
    const auto v = keys::decode_ints(g);
    return "(" + std::to_string(v[0]) + "," + std::to_string(v[1]) + "," + std::to_string(v[2]) + ")";
  }
};

// ---------------------------------------------------------------------------
// Lamplighter Z/2 wr Z: key = cursor, then the sorted positions of lit lamps.

class Lamplighter final : public GroupModel {
 public:
  Lamplighter() {
    set_generators({{"t", encode(1, {}), 1}, {"T", encode(-1, {}), 0}, {"a", encode(0, {0}), 2}});
  }

  ModelKind kind() const noexcept override { return ModelKind::lamplighter; }
  std::string spec() const override { return "lamplighter"; }
  Key identity_key() const override { return encode(0, {}); }

  Key multiply(std::string_view g, std::string_view h) const override {
    std::vector<std::int64_t> l1, l2;
    const auto p1 = decode(g, l1);
    const auto p2 = decode(h, l2);
    for (auto& x : l2) x = checked_add(x, p1);
    std::vector<std::int64_t> out;
    out.reserve(l1.size() + l2.size());
    std::set_symmetric_difference(l1.begin(), l1.end(), l2.begin(), l2.end(), std::back_inserter(out));
    return encode(checked_add(p1, p2), out);
  }

  Key invert(std::string_view g) const override {
    std::vector<std::int64_t> lamps;
    const auto p = decode(g, lamps);
    for (auto& x : lamps) x -= p;
    return encode(-p, lamps);
  }

  std::string describe(std::string_view g) const override {
    std::vector<std::int64_t> lamps;
    const auto p = decode(g, lamps);
    std::string out = "{";
    for (std::size_t i = 0; i < lamps.size(); ++i) out += (i ? "," : "") + std::to_string(lamps[i]);
    return out + "}@" + std::to_string(p);
  }

 private:
  static Key encode(std::int64_t cursor, const std::vector<std::int64_t>& lamps) {
    std::string out;
    keys::put_int(out, cursor);
    for (auto x : lamps) keys::put_int(out, x);
    return out;
  }
  static std::int64_t decode(std::string_view key, std::vector<std::int64_t>& lamps) {
    const auto cursor = keys::take_int(key);
    while (!key.empty()) lamps.push_back(keys::take_int(key));
    return cursor;
  }
};

// ---------------------------------------------------------------------------
// BS(1,m) as the affine group x -> m^k x + n / m^s. The key stores (k, n, s)
// with s >= 0 minimal, i.e. m does not divide n whenever s > 0.

class BaumslagSolitar final : public GroupModel {
 public:
  explicit BaumslagSolitar(int m) : m_(m) {
    set_generators({{"a", encode(0, 1, 0), 1},
                    {"A", encode(0, -1, 0), 0},
                    {"t", encode(1, 0, 0), 3},
                    {"T", encode(-1, 0, 0), 2}});
  }

  ModelKind kind() const noexcept override { return ModelKind::baumslag_solitar; }
  std::string spec() const override { return "bs:1:" + std::to_string(m_); }
  Key identity_key() const override { return encode(0, 0, 0); }

  Key multiply(std::string_view g, std::string_view h) const override {
    const auto k1 = keys::take_int(g), n1 = keys::take_int(g), s1 = keys::take_int(g);
    const auto k2 = keys::take_int(h), n2 = keys::take_int(h), s2 = keys::take_int(h);
    // beta = n1/m^s1 + m^k1 * n2/m^s2 over the common denominator m^S.
    const auto S = std::max<std::int64_t>({s1, s2 - k1, 0});
    const auto n = checked_add(checked_mul(n1, power(S - s1)), checked_mul(n2, power(S - s2 + k1)));
    return normalized(checked_add(k1, k2), n, S);
  }

  Key invert(std::string_view g) const override {
    const auto k = keys::take_int(g), n = keys::take_int(g), s = keys::take_int(g);
    // (m^k, beta)^-1 = (m^-k, -beta / m^k)
    if (s + k >= 0) return normalized(-k, -n, s + k);
    return normalized(-k, checked_mul(-n, power(-(s + k))), 0);
  }

  /// Normal form t^-p a^q t^r with p, r >= 0.
  std::string describe(std::string_view g) const override {
    const auto k = keys::take_int(g), n = keys::take_int(g), s = keys::take_int(g);
    const auto p = std::max(s, -k);
    const auto q = checked_mul(n, power(p - s));
    const auto r = k + p;
    std::string out;
    auto part = [&out](const std::string& text) { out += (out.empty() ? "" : " ") + text; };
    if (p != 0) part("t^-" + std::to_string(p));
    if (q != 0) part("a^" + std::to_string(q));
    if (r != 0) part("t^" + std::to_string(r));
    return out.empty() ? "e" : out;
  }

  int virtual_abelian_rank() const noexcept override { return m_ == 1 ? 2 : -1; }

 private:
  std::int64_t power(std::int64_t e) const { return m_ == 1 ? 1 : checked_pow(m_, e); }

  Key normalized(std::int64_t k, std::int64_t n, std::int64_t s) const {
    if (m_ == 1 || n == 0) s = 0;
    while (s > 0 && n % m_ == 0) {
      n /= m_;
      --s;
    }
    return encode(k, n, s);
  }

  static Key encode(std::int64_t k, std::int64_t n, std::int64_t s) { return keys::encode_ints({k, n, s}); }

  int m_;
};

// ---------------------------------------------------------------------------

class FiniteGroup final : public GroupModel {
 public:
  FiniteGroup(std::vector<std::string> names, std::vector<std::vector<std::size_t>> table,
              std::vector<std::string> generator_names, std::string spec)
      : names_(std::move(names)), table_(std::move(table)), spec_(std::move(spec)) {
    const auto n = names_.size();
    if (n == 0) throw UsageError("finite group table is empty");
    if (table_.size() != n) throw UsageError("finite group table is not square");
    for (const auto& row : table_) {
      if (row.size() != n) throw UsageError("finite group table is not square");
      std::vector<bool> seen(n, false);
      for (auto v : row) {
        if (v >= n || seen[v]) throw UsageError("finite group table rows must be permutations");
        seen[v] = true;
      }
    }
    identity_ = n;
    for (std::size_t e = 0; e < n && identity_ == n; ++e) {
      bool ok = true;
      for (std::size_t x = 0; x < n && ok; ++x) ok = table_[e][x] == x && table_[x][e] == x;
      if (ok) identity_ = e;
    }
    if (identity_ == n) throw UsageError("finite group table has no identity element");
    inverse_.assign(n, n);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        if (table_[x][y] == identity_) inverse_[x] = y;
    // Exhaustive associativity check for small tables, strided sample otherwise.
    const std::size_t stride = n <= 100 ? 1 : n / 50;
    for (std::size_t a = 0; a < n; a += stride)
      for (std::size_t b = 0; b < n; b += stride)
        for (std::size_t c = 0; c < n; c += stride)
          if (table_[table_[a][b]][c] != table_[a][table_[b][c]])
            throw UsageError("finite group table is not associative at (" + names_[a] + "," + names_[b] +
                             "," + names_[c] + ")");

    std::vector<std::size_t> chosen;
    if (generator_names.empty()) {
      for (std::size_t x = 0; x < n; ++x)
        if (x != identity_) chosen.push_back(x);
    } else {
      for (const auto& name : generator_names) chosen.push_back(index_of(name));
      for (std::size_t i = 0, m = chosen.size(); i < m; ++i)
        if (std::find(chosen.begin(), chosen.end(), inverse_[chosen[i]]) == chosen.end())
          chosen.push_back(inverse_[chosen[i]]);
    }
    std::vector<Generator> gens;
    for (auto x : chosen) gens.push_back({names_[x], key_of(x), 0});
    for (auto& g : gens) {
      const auto inv = key_of(inverse_[index_from_key(g.key)]);
      for (std::size_t j = 0; j < gens.size(); ++j)
        if (gens[j].key == inv) g.inverse = j;
    }
    set_generators(std::move(gens));
  }

  ModelKind kind() const noexcept override { return ModelKind::finite; }
  std::string spec() const override { return spec_; }
  Key identity_key() const override { return key_of(identity_); }
  Key multiply(std::string_view g, std::string_view h) const override {
    return key_of(table_[index_from_key(g)][index_from_key(h)]);
  }
  Key invert(std::string_view g) const override { return key_of(inverse_[index_from_key(g)]); }
  std::string describe(std::string_view g) const override { return names_[index_from_key(g)]; }
  int virtual_abelian_rank() const noexcept override { return 0; }

 private:
  static Key key_of(std::size_t i) {
    std::string out;
    keys::put_int(out, static_cast<std::int64_t>(i));
    return out;
  }
  std::size_t index_from_key(std::string_view key) const {
    const auto v = keys::take_int(key);
    if (v < 0 || static_cast<std::size_t>(v) >= names_.size()) throw UsageError("invalid finite-group key");
    return static_cast<std::size_t>(v);
  }
  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return i;
    throw UsageError("unknown element name '" + name + "' in finite group");
  }

  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> table_;
  std::vector<std::size_t> inverse_;
  std::size_t identity_ = 0;
  std::string spec_;
};

// ---------------------------------------------------------------------------
// Direct product: key = concatenation of length-prefixed factor keys.

class DirectProduct final : public GroupModel {
 public:
  explicit DirectProduct(std::vector<ModelPtr> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw UsageError("direct product needs at least one factor");
    std::vector<Generator> gens;
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      const auto offset = gens.size();
      for (const auto& g : factors_[f]->generators()) {
        std::vector<Key> parts;
        for (std::size_t i = 0; i < factors_.size(); ++i)
          parts.push_back(i == f ? g.key : factors_[i]->identity_key());
        gens.push_back({g.name + std::to_string(f + 1), join(parts), offset + g.inverse});
      }
    }
    set_generators(std::move(gens));
  }

  ModelKind kind() const noexcept override { return ModelKind::direct_product; }
  std::string spec() const override {
    std::string out = "product:";
    for (std::size_t i = 0; i < factors_.size(); ++i) out += (i ? "+" : "") + factors_[i]->spec();
    return out;
  }
  Key identity_key() const override {
    std::vector<Key> parts;
    for (const auto& f : factors_) parts.push_back(f->identity_key());
    return join(parts);
  }
  Key multiply(std::string_view g, std::string_view h) const override {
    const auto a = split(g), b = split(h);
    std::vector<Key> parts;
    for (std::size_t i = 0; i < factors_.size(); ++i) parts.push_back(factors_[i]->multiply(a[i], b[i]));
    return join(parts);
  }
  Key invert(std::string_view g) const override {
    const auto a = split(g);
    std::vector<Key> parts;
    for (std::size_t i = 0; i < factors_.size(); ++i) parts.push_back(factors_[i]->invert(a[i]));
    return join(parts);
  }
  std::string describe(std::string_view g) const override {
    const auto a = split(g);
    std::string out = "<";
    for (std::size_t i = 0; i < factors_.size(); ++i) out += (i ? "; " : "") + factors_[i]->describe(a[i]);
    return out + ">";
  }
  int virtual_abelian_rank() const noexcept override {
    int total = 0;
    for (const auto& f : factors_) {
      const int r = f->virtual_abelian_rank();
      if (r < 0) return -1;
      total += r;
    }
    return total;
  }

 private:
  static Key join(const std::vector<Key>& parts) {
    std::string out;
    for (const auto& p : parts) {
      keys::put_int(out, static_cast<std::int64_t>(p.size()));
      out += p;
    }
    return out;
  }
  std::vector<std::string_view> split(std::string_view key) const {
    std::vector<std::string_view> out;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      const auto len = static_cast<std::size_t>(keys::take_int(key));
      out.push_back(key.substr(0, len));
      key.remove_prefix(len);
    }
    return out;
  }

  std::vector<ModelPtr> factors_;
};

int parse_positive(std::string_view text, std::string_view what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(std::string(text), &used);
    if (used != text.size() || v < 1) throw std::invalid_argument("range");
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.pop_back();
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

}  // namespace

ModelPtr make_free(int rank) {
  if (rank < 1 || rank > 26) throw UsageError("free group rank must be in [1, 26]");
  return std::make_shared<FreeGroup>(rank);
}

ModelPtr make_free_abelian(int dim) {
  if (dim < 1 || dim > 26) throw UsageError("free abelian rank must be in [1, 26]");
  return std::make_shared<FreeAbelian>(dim);
}

ModelPtr make_heisenberg() { return std::make_shared<Heisenberg>(); }

ModelPtr make_lamplighter() { return std::make_shared<Lamplighter>(); }

ModelPtr make_baumslag_solitar(int m) {
  if (m < 1) throw UsageError("BS(1,m) requires m >= 1");
  return std::make_shared<BaumslagSolitar>(m);
}

ModelPtr make_finite(std::vector<std::string> names, std::vector<std::vector<std::size_t>> table,
                     std::vector<std::string> generator_names, std::string spec) {
  return std::make_shared<FiniteGroup>(std::move(names), std::move(table), std::move(generator_names),
                                       std::move(spec));
}

ModelPtr load_finite_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open finite group table '" + path.string() + "'");
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.size() < 2) throw UsageError("finite group table '" + path.string() + "' has no rows");
  std::vector<std::string> names(rows[0].begin() + 1, rows[0].end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!index.emplace(names[i], i).second) throw UsageError("duplicate element name '" + names[i] + "'");
  }
  auto lookup = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw UsageError("unknown element '" + name + "' in finite group table");
    return it->second;
  };
  std::vector<std::vector<std::size_t>> table(names.size());
  std::vector<bool> filled(names.size(), false);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != names.size() + 1) throw UsageError("finite group table row has wrong length");
    const auto i = lookup(rows[r][0]);
    if (filled[i]) throw UsageError("duplicate row for '" + rows[r][0] + "'");
    filled[i] = true;
    for (std::size_t c = 1; c < rows[r].size(); ++c) table[i].push_back(lookup(rows[r][c]));
  }
  if (std::find(filled.begin(), filled.end(), false) != filled.end())
    throw UsageError("finite group table is missing rows");
  return make_finite(std::move(names), std::move(table), {}, "finite:" + path.string());
}

ModelPtr make_direct_product(std::vector<ModelPtr> factors) {
  return std::make_shared<DirectProduct>(std::move(factors));
}

ModelPtr parse_model_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  const auto head = spec.substr(0, colon);
  const auto rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (head == "free") return make_free(parse_positive(rest, "free group rank"));
  if (head == "abelian") return make_free_abelian(parse_positive(rest, "abelian rank"));
  if (head == "heisenberg" && rest.empty()) return make_heisenberg();
  if (head == "lamplighter" && rest.empty()) return make_lamplighter();
  if (head == "bs") {
    const auto c2 = rest.find(':');
    if (c2 == std::string_view::npos || rest.substr(0, c2) != "1")
      throw UsageError("only BS(1,m) is supported; use bs:1:<m>");
    return make_baumslag_solitar(parse_positive(rest.substr(c2 + 1), "BS parameter"));
  }
  if (head == "finite" && !rest.empty()) return load_finite_csv(std::filesystem::path(std::string(rest)));
  if (head == "product" && !rest.empty()) {
    std::vector<ModelPtr> factors;
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto plus = rest.find('+', start);
      const auto part = rest.substr(start, plus == std::string_view::npos ? std::string_view::npos : plus - start);
      factors.push_back(parse_model_spec(part));
      if (plus == std::string_view::npos) break;
      start = plus + 1;
    }
    return make_direct_product(std::move(factors));
  }
  throw UsageError("unknown model spec '" + std::string(spec) + "'");
}

}  // namespace lv
