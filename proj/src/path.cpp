#include "rwre/path.hpp"

#include <algorithm>
#include <stdexcept>

namespace rwre {

VertexPath::VertexPath(std::initializer_list<int> letters) {
  letters_.reserve(letters.size());
  for (int l : letters) {
    if (l < 1 || l > 255) throw std::invalid_argument("vertex letter out of range");
    letters_.push_back(static_cast<std::uint8_t>(l));
  }
}

VertexPath VertexPath::truncate(std::size_t k) const {
  if (k > letters_.size()) throw std::out_of_range("truncation deeper than path");
  return VertexPath(std::vector<std::uint8_t>(letters_.begin(), letters_.begin() + k));
}

VertexPath VertexPath::parent() const {
  if (is_root()) throw std::out_of_range("root has no parent");
  return truncate(letters_.size() - 1);
}

VertexPath VertexPath::child(int letter) const {
  auto out = letters_;
  out.push_back(static_cast<std::uint8_t>(letter));
  return VertexPath(std::move(out));
}

bool VertexPath::valid_for(int d) const {
  return std::all_of(letters_.begin(), letters_.end(),
                     [d](std::uint8_t l) { return l >= 1 && l <= d; });
}

bool VertexPath::is_prefix_of(const VertexPath& other) const {
  return letters_.size() <= other.letters_.size() &&
         std::equal(letters_.begin(), letters_.end(), other.letters_.begin());
}

std::string VertexPath::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(letters_[i]);
  }
  return s + ")";
}

}  // namespace rwre
