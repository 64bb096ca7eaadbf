#ifndef GMEASURE_CORE_HPP
#define GMEASURE_CORE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gmeasure {

/// Error categories map one-to-one onto CLI exit codes:
/// spec_error -> 2, resource_error -> 3, diagnostic_error -> 4.
class spec_error : public std::runtime_error {
public:
  explicit spec_error(const std::string& msg) : std::runtime_error(msg) {}
};

class resource_error : public std::runtime_error {
public:
  explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

class diagnostic_error : public std::runtime_error {
public:
  explicit diagnostic_error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace tol {
// Shared numeric tolerances. Comparisons of analytically equal quantities
// use `eq`; looser constants are part of module contracts.
inline constexpr double eq = 1e-12;
inline constexpr double normalization = 1e-9;
inline constexpr double row_sum = 1e-10;
inline constexpr double fixed_point = 1e-10;
inline constexpr double kernel_tail = 1e-10;
}  // namespace tol

/// Ordered finite alphabet with stable symbol indices. Labels are single
/// characters so words serialize as plain strings.
class Alphabet {
public:
  explicit Alphabet(std::string labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2)
      throw spec_error("alphabet needs at least 2 symbols, got " +
                       std::to_string(labels_.size()));
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw spec_error(std::string("duplicate alphabet symbol '") +
                           labels_[i] + "'");
  }

  std::size_t size() const { return labels_.size(); }
  char label(std::size_t i) const { return labels_.at(i); }
  const std::string& labels() const { return labels_; }

  bool contains(char c) const {
    return labels_.find(c) != std::string::npos;
  }

  std::size_t index_of(char c) const {
    auto pos = labels_.find(c);
    if (pos == std::string::npos)
      throw spec_error(std::string("symbol '") + c + "' not in alphabet \"" +
                       labels_ + "\"");
    return pos;
  }

  bool operator==(const Alphabet& o) const { return labels_ == o.labels_; }

private:
  std::string labels_;
};

/// A finite string over the alphabet indexing a cylinder. Storage order is
/// oldest-first, most-recent symbol last, so position j of a length-k word
/// is coordinate -(k-1)+j and the serialized form reads like the string
/// itself ("0001" fixes coordinates -3..0).
class Word {
public:
  Word() = default;
  explicit Word(std::string symbols) : s_(std::move(symbols)) {}

  std::size_t size() const { return s_.size(); }
  bool empty() const { return s_.empty(); }
  char at(std::size_t i) const { return s_.at(i); }
  char last() const { return s_.back(); }
  const std::string& str() const { return s_; }

  /// Most recent n symbols (the depth-n suffix cylinder this word refines).
  Word suffix(std::size_t n) const {
    if (n >= s_.size()) return *this;
    return Word(s_.substr(s_.size() - n));
  }

  /// First n symbols, oldest side.
  Word prefix(std::size_t n) const {
    if (n >= s_.size()) return *this;
    return Word(s_.substr(0, n));
  }

  bool ends_with(const Word& w) const {
    if (w.size() > s_.size()) return false;
    return std::equal(w.s_.rbegin(), w.s_.rend(), s_.rbegin());
  }

  /// New word with `a` prepended on the old side (one coordinate deeper
  /// into the past).
  Word prepended(char a) const { return Word(std::string(1, a) + s_); }

  bool operator==(const Word& o) const { return s_ == o.s_; }
  bool operator!=(const Word& o) const { return s_ != o.s_; }
  bool operator<(const Word& o) const { return s_ < o.s_; }

private:
  std::string s_;
};

/// Appends `a` at coordinate 0; earlier coordinates shift one step older.
inline Word extend(const Alphabet& alphabet, const Word& w, char a) {
  if (!alphabet.contains(a))
    throw spec_error(std::string("extend: symbol '") + a +
                     "' not in alphabet \"" + alphabet.labels() + "\"");
  return Word(w.str() + a);
}

/// Removes the coordinate-0 symbol (the action of the shift on cylinders).
inline Word drop_last(const Word& w) {
  if (w.empty()) throw spec_error("drop_last: empty word");
  return Word(w.str().substr(0, w.size() - 1));
}

inline Word repeated(char a, std::size_t n) {
  return Word(std::string(n, a));
}

/// Certified lower/upper bounds for a kernel value over a cylinder.
/// Endpoints are the closure of the attainable set, so lo == hi exactly
/// when the kernel is constant on the cylinder.
struct ProbabilityInterval {
  double lo = 0.0;
  double hi = 1.0;

  ProbabilityInterval() = default;
  ProbabilityInterval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo >= 0.0) || !(hi <= 1.0) || lo > hi)
      throw spec_error("invalid probability interval [" + std::to_string(lo_) +
                       ", " + std::to_string(hi_) + "]");
  }

  static ProbabilityInterval point(double v) {
    return ProbabilityInterval(v, v);
  }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool degenerate(double eps = tol::eq) const { return width() <= eps; }

  bool contains(const ProbabilityInterval& o, double slack = 0.0) const {
    return o.lo >= lo - slack && o.hi <= hi + slack;
  }

  ProbabilityInterval intersect(const ProbabilityInterval& o) const {
    double l = std::max(lo, o.lo), h = std::min(hi, o.hi);
    if (l > h) throw spec_error("empty interval intersection");
    return ProbabilityInterval(l, h);
  }

  /// Interval product; both operands live in [0,1] so no endpoint case
  /// analysis is needed.
  ProbabilityInterval operator*(const ProbabilityInterval& o) const {
    return ProbabilityInterval(lo * o.lo, hi * o.hi);
  }

  /// Smallest interval covering both.
  ProbabilityInterval hull(const ProbabilityInterval& o) const {
    return ProbabilityInterval(std::min(lo, o.lo), std::max(hi, o.hi));
  }
};

/// All words of a given length in lexicographic symbol-index order.
inline std::vector<Word> all_words(const Alphabet& alphabet, std::size_t len) {
  std::vector<Word> out;
  const std::size_t m = alphabet.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < len; ++i) {
    if (total > (std::size_t{1} << 26) / m)
      throw resource_error("word enumeration too large: " +
                           std::to_string(m) + "^" + std::to_string(len));
    total *= m;
  }
  out.reserve(total);
  std::string cur(len, alphabet.label(0));
  std::vector<std::size_t> idx(len, 0);
  for (std::size_t c = 0; c < total; ++c) {
    out.emplace_back(cur);
    // odometer increment, last position fastest
    for (std::size_t p = len; p-- > 0;) {
      if (++idx[p] < m) {
        cur[p] = alphabet.label(idx[p]);
        break;
      }
      idx[p] = 0;
      cur[p] = alphabet.label(0);
    }
  }
  return out;
}

}  // namespace gmeasure

#endif  // GMEASURE_CORE_HPP
