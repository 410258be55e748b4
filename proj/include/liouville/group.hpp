#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lv {

/// Canonical byte encoding of a group element. Two keys of the same model
/// are equal exactly when the elements are equal.
using Key = std::string;

struct GroupElement {
  Key key;
  std::uint64_t model_id = 0;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

enum class ModelKind {
  free_group,
  free_abelian,
  heisenberg,
  lamplighter,
  baumslag_solitar,
  finite,
  direct_product,
};

struct Generator {
  std::string name;
  Key key;
  std::size_t inverse = 0;  // position of the inverse generator in the list
};

/// A finitely generated group with a declared symmetric generating set.
///
/// Implementations only supply the key arithmetic; the element-level API
/// checks ownership and wraps keys. Models are immutable once built and may
/// be shared between threads.
class GroupModel {
 public:
  virtual ~GroupModel() = default;
  GroupModel(const GroupModel&) = delete;
  GroupModel& operator=(const GroupModel&) = delete;

  std::uint64_t id() const noexcept { return id_; }
  const std::vector<Generator>& generators() const noexcept { return generators_; }

  virtual ModelKind kind() const noexcept = 0;
  /// The spec string this model was built from, e.g. "free:2".
  virtual std::string spec() const = 0;
  virtual Key identity_key() const = 0;
  virtual Key multiply(std::string_view g, std::string_view h) const = 0;
  virtual Key invert(std::string_view g) const = 0;
  /// Human-readable normal form.
  virtual std::string describe(std::string_view g) const = 0;
  /// Rank r if the group is known to be a finite extension of Z^r, else -1.
  virtual int virtual_abelian_rank() const noexcept { return -1; }

  GroupElement identity() const { return wrap(identity_key()); }
  GroupElement wrap(Key key) const { return GroupElement{std::move(key), id_}; }
  GroupElement generator(std::size_t i) const;
  GroupElement mul(const GroupElement& g, const GroupElement& h) const;
  GroupElement inv(const GroupElement& g) const;
  GroupElement word(std::span<const std::size_t> letters) const;

  /// Parses a word over the generator names. Single-character alphabets are
  /// read letter by letter ("abAB"); longer names are separated by '.' or
  /// whitespace. Any token may carry an integer exponent ("a^5", "t^-2").
  /// "e" and the empty string denote the identity.
  GroupElement parse(std::string_view text) const;
  std::vector<std::size_t> parse_letters(std::string_view text) const;
  std::string format(const GroupElement& g) const;

  /// True for the structurally recurrent cases: finite groups and finite
  /// extensions of Z or Z^2.
  bool transience_excluded() const noexcept;

  void check(const GroupElement& g) const;

 protected:
  GroupModel();
  void set_generators(std::vector<Generator> gens);

 private:
  std::uint64_t id_;
  std::vector<Generator> generators_;
};

using ModelPtr = std::shared_ptr<const GroupModel>;

/// Free group on `rank` generators a, b, c, ... (inverses A, B, C, ...).
ModelPtr make_free(int rank);
/// Z^dim with unit generators a, b, c, ... (inverses uppercase).
ModelPtr make_free_abelian(int dim);
/// Integer Heisenberg group in normal coordinates (x, y, z),
/// (x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy'); generators a=(1,0,0), b=(0,1,0).
ModelPtr make_heisenberg();
/// Z/2 wr Z with generators t (cursor right), T (cursor left), a (toggle).
ModelPtr make_lamplighter();
/// BS(1,m) = <a, t | t a t^-1 = a^m>, m >= 1, generators a, A, t, T.
ModelPtr make_baumslag_solitar(int m);

/// Finite group from a multiplication table. `names[i]` labels element i and
/// `table[i][j]` is the index of names[i]*names[j]. Generators default to all
/// non-identity elements.
ModelPtr make_finite(std::vector<std::string> names, std::vector<std::vector<std::size_t>> table,
                     std::vector<std::string> generator_names = {}, std::string spec = "finite");
/// CSV table: first row and column carry the element names.
ModelPtr load_finite_csv(const std::filesystem::path& path);

ModelPtr make_direct_product(std::vector<ModelPtr> factors);

/// Parses "free:2", "abelian:3", "heisenberg", "lamplighter", "bs:1:2",
/// "finite:<csv>", or "product:<spec>+<spec>+...".
ModelPtr parse_model_spec(std::string_view spec);

}  // namespace lv
