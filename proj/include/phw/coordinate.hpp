#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace phw {

/// One jet-bundle coordinate.
///
/// Kinds:
///  - Independent: a base coordinate X^A (index = A).
///  - Dependent:   a field value x^alpha (index = alpha).
///  - Derivative:  a jet coordinate x^alpha_K (index = alpha, multi = K).
///
/// The multi-index is stored sorted ascending; total derivatives commute,
/// so (X,Y) and (Y,X) name the same coordinate.
struct Coordinate {
  enum class Kind : std::uint8_t { Independent, Dependent, Derivative };

  Kind kind = Kind::Independent;
  int index = 0;
  std::vector<int> multi;

  static Coordinate independent(int a) {
    return Coordinate{Kind::Independent, a, {}};
  }
  static Coordinate dependent(int alpha) {
    return Coordinate{Kind::Dependent, alpha, {}};
  }
  static Coordinate derivative(int alpha, std::vector<int> m) {
    std::sort(m.begin(), m.end());
    if (m.empty()) return dependent(alpha);
    return Coordinate{Kind::Derivative, alpha, std::move(m)};
  }

  /// Derivative order: 0 for values and base coordinates.
  int order() const { return static_cast<int>(multi.size()); }

  bool is_jet() const {
    return kind == Kind::Dependent || kind == Kind::Derivative;
  }

  /// The same field coordinate with one more total-derivative index.
  Coordinate promoted(int a) const {
    std::vector<int> m = multi;
    m.push_back(a);
    return derivative(index, std::move(m));
  }

  /// The underlying field value coordinate (identity for non-derivatives).
  Coordinate base() const {
    if (kind == Kind::Derivative) return dependent(index);
    return *this;
  }

  /// Total order: kind, then field/base index, then graded-lexicographic
  /// multi-index (order first, then entries).  Keeps the derivative
  /// coordinates of one field adjacent and sorted by order.
  int compare(const Coordinate& o) const {
    if (kind != o.kind) return kind < o.kind ? -1 : 1;
    if (index != o.index) return index < o.index ? -1 : 1;
    if (multi.size() != o.multi.size())
      return multi.size() < o.multi.size() ? -1 : 1;
    for (size_t i = 0; i < multi.size(); ++i)
      if (multi[i] != o.multi[i]) return multi[i] < o.multi[i] ? -1 : 1;
    return 0;
  }

  friend bool operator==(const Coordinate& a, const Coordinate& b) {
    return a.compare(b) == 0;
  }
  friend bool operator!=(const Coordinate& a, const Coordinate& b) {
    return a.compare(b) != 0;
  }
  friend bool operator<(const Coordinate& a, const Coordinate& b) {
    return a.compare(b) < 0;
  }
};

}  // namespace phw
