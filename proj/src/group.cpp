#include "liouville/group.hpp"

#include <atomic>
#include <cctype>
#include <charconv>

#include "liouville/errors.hpp"

namespace lv {

namespace {

std::uint64_t next_model_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

bool is_separator(char c) { return c == '.' || std::isspace(static_cast<unsigned char>(c)); }

}  // namespace

GroupModel::GroupModel() : id_(next_model_id()) {}

void GroupModel::set_generators(std::vector<Generator> gens) { generators_ = std::move(gens); }

void GroupModel::check(const GroupElement& g) const {
  if (g.model_id != id_) {
    throw UsageError("element belongs to a different group model than " + spec());
  }
}

GroupElement GroupModel::generator(std::size_t i) const {
  if (i >= generators_.size()) throw UsageError("generator index out of range");
  return wrap(generators_[i].key);
}

GroupElement GroupModel::mul(const GroupElement& g, const GroupElement& h) const {
  check(g);
  check(h);
  return wrap(multiply(g.key, h.key));
}

GroupElement GroupModel::inv(const GroupElement& g) const {
  check(g);
  return wrap(invert(g.key));
}

GroupElement GroupModel::word(std::span<const std::size_t> letters) const {
  Key acc = identity_key();
  for (auto i : letters) {
    if (i >= generators_.size()) throw UsageError("generator index out of range");
    acc = multiply(acc, generators_[i].key);
  }
  return wrap(std::move(acc));
}

std::vector<std::size_t> GroupModel::parse_letters(std::string_view text) const {
  bool single_chars = true;
  for (const auto& g : generators_) single_chars = single_chars && g.name.size() == 1;

  std::vector<std::size_t> letters;
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty() || text == "e") return letters;

  std::size_t pos = 0;
  while (pos < text.size()) {
    if (is_separator(text[pos])) {
      ++pos;
      continue;
    }
    std::size_t gen = generators_.size();
    std::size_t len = 0;
    if (single_chars) {
      for (std::size_t i = 0; i < generators_.size(); ++i) {
        if (generators_[i].name[0] == text[pos]) {
          gen = i;
          len = 1;
          break;
        }
      }
    } else {
      std::size_t end = pos;
      while (end < text.size() && !is_separator(text[end]) && text[end] != '^') ++end;
      const auto token = text.substr(pos, end - pos);
      for (std::size_t i = 0; i < generators_.size(); ++i) {
        if (generators_[i].name == token) {
          gen = i;
          len = token.size();
          break;
        }
      }
    }
    if (gen == generators_.size()) {
      if (text.substr(pos, 1) == "e" && single_chars) {
        ++pos;  // explicit identity letter inside a word
        continue;
      }
      throw UsageError("unknown generator in word '" + std::string(text) + "' at position " +
                       std::to_string(pos));
    }
    pos += len;
    long exponent = 1;
    if (pos < text.size() && text[pos] == '^') {
      ++pos;
      const char* first = text.data() + pos;
      const char* last = text.data() + text.size();
      auto [ptr, ec] = std::from_chars(first, last, exponent);
      if (ec != std::errc{}) throw UsageError("bad exponent in word '" + std::string(text) + "'");
      pos += static_cast<std::size_t>(ptr - first);
    }
    const std::size_t letter = exponent < 0 ? generators_[gen].inverse : gen;
    for (long k = 0; k < (exponent < 0 ? -exponent : exponent); ++k) letters.push_back(letter);
  }
  return letters;
}

GroupElement GroupModel::parse(std::string_view text) const {
  const auto letters = parse_letters(text);
  return word(letters);
}

std::string GroupModel::format(const GroupElement& g) const {
  check(g);
  return describe(g.key);
}

bool GroupModel::transience_excluded() const noexcept {
  const int rank = virtual_abelian_rank();
  return rank >= 0 && rank <= 2;
}

}  // namespace lv
