#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rwre {

// A vertex of the rooted d-ary tree, identified by its genealogy: the
// sequence of child indices (letters in 1..d) from the root. The empty
// sequence is the root.
class VertexPath {
 public:
  VertexPath() = default;
  explicit VertexPath(std::vector<std::uint8_t> letters) : letters_(std::move(letters)) {}
  VertexPath(std::initializer_list<int> letters);

  std::size_t depth() const { return letters_.size(); }
  bool is_root() const { return letters_.empty(); }
  std::span<const std::uint8_t> letters() const { return letters_; }
  int operator[](std::size_t k) const { return letters_[k]; }

  // v|_k, the ancestor at depth k.
  VertexPath truncate(std::size_t k) const;
  VertexPath parent() const;
  VertexPath child(int letter) const;
  int last() const { return letters_.back(); }

  // Colour map c(v): the last letter, or the root colour for the root.
  int colour(int root_colour) const { return is_root() ? root_colour : last(); }

  bool valid_for(int d) const;
  // u <= v: u is an initial segment of v.
  bool is_prefix_of(const VertexPath& other) const;

  std::string to_string() const;

  auto operator<=>(const VertexPath&) const = default;
  bool operator==(const VertexPath&) const = default;

 private:
  std::vector<std::uint8_t> letters_;
};

}  // namespace rwre
