#ifndef AXCAT_RELATION_HPP_
#define AXCAT_RELATION_HPP_

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace axcat {

using EventId = std::size_t;

/// Dense set of event ids over a fixed universe [0, size).
class EventSet {
 public:
  EventSet() = default;
  explicit EventSet(std::size_t universe)
      : size_(universe), words_((universe + 63) / 64, 0) {}

  std::size_t universe() const { return size_; }

  void insert(EventId e) {
    assert(e < size_);
    words_[e / 64] |= std::uint64_t{1} << (e % 64);
  }
  void erase(EventId e) {
    assert(e < size_);
    words_[e / 64] &= ~(std::uint64_t{1} << (e % 64));
  }
  bool contains(EventId e) const {
    return e < size_ && ((words_[e / 64] >> (e % 64)) & 1U) != 0;
  }
  bool empty() const {
    return std::all_of(words_.begin(), words_.end(),
                       [](std::uint64_t w) { return w == 0; });
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  std::vector<EventId> elements() const {
    std::vector<EventId> out;
    for (EventId e = 0; e < size_; ++e)
      if (contains(e)) out.push_back(e);
    return out;
  }

  EventSet& operator|=(const EventSet& o) {
    assert(size_ == o.size_);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  EventSet& operator&=(const EventSet& o) {
    assert(size_ == o.size_);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }

  friend bool operator==(const EventSet&, const EventSet&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Binary relation over events, stored as a row-major bit matrix.
///
/// All operators require both operands to share the same universe. The
/// closure operators use Warshall's algorithm over bit rows, which is plenty
/// for litmus-sized executions (a few hundred events at most).
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::size_t universe)
      : size_(universe),
        stride_((universe + 63) / 64),
        bits_(size_ * stride_, 0) {}

  static Relation identity(const EventSet& s) {
    Relation r(s.universe());
    for (EventId e = 0; e < s.universe(); ++e)
      if (s.contains(e)) r.insert(e, e);
    return r;
  }

  static Relation product(const EventSet& a, const EventSet& b) {
    assert(a.universe() == b.universe());
    Relation r(a.universe());
    for (EventId x = 0; x < a.universe(); ++x) {
      if (!a.contains(x)) continue;
      for (EventId y = 0; y < b.universe(); ++y)
        if (b.contains(y)) r.insert(x, y);
    }
    return r;
  }

  std::size_t universe() const { return size_; }

  void insert(EventId a, EventId b) {
    assert(a < size_ && b < size_);
    bits_[a * stride_ + b / 64] |= std::uint64_t{1} << (b % 64);
  }
  void erase(EventId a, EventId b) {
    assert(a < size_ && b < size_);
    bits_[a * stride_ + b / 64] &= ~(std::uint64_t{1} << (b % 64));
  }
  bool contains(EventId a, EventId b) const {
    if (a >= size_ || b >= size_) return false;
    return ((bits_[a * stride_ + b / 64] >> (b % 64)) & 1U) != 0;
  }

  bool empty() const {
    return std::all_of(bits_.begin(), bits_.end(),
                       [](std::uint64_t w) { return w == 0; });
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (auto w : bits_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  std::vector<std::pair<EventId, EventId>> pairs() const {
    std::vector<std::pair<EventId, EventId>> out;
    for (EventId a = 0; a < size_; ++a)
      for (EventId b = 0; b < size_; ++b)
        if (contains(a, b)) out.emplace_back(a, b);
    return out;
  }

  EventSet domain() const {
    EventSet s(size_);
    for (EventId a = 0; a < size_; ++a)
      if (!row_empty(a)) s.insert(a);
    return s;
  }

  Relation& operator|=(const Relation& o) {
    assert(size_ == o.size_);
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= o.bits_[i];
    return *this;
  }
  Relation& operator&=(const Relation& o) {
    assert(size_ == o.size_);
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= o.bits_[i];
    return *this;
  }
  Relation& operator-=(const Relation& o) {
    assert(size_ == o.size_);
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= ~o.bits_[i];
    return *this;
  }

  friend Relation operator|(Relation a, const Relation& b) { return a |= b; }
  friend Relation operator&(Relation a, const Relation& b) { return a &= b; }
  friend Relation operator-(Relation a, const Relation& b) { return a -= b; }
  friend bool operator==(const Relation&, const Relation&) = default;

  bool subset_of(const Relation& o) const { return (*this - o).empty(); }

  Relation inverse() const {
    Relation r(size_);
    for (EventId a = 0; a < size_; ++a)
      for (EventId b = 0; b < size_; ++b)
        if (contains(a, b)) r.insert(b, a);
    return r;
  }

  /// Relational composition: (a, c) whenever (a, b) in *this and (b, c) in o.
  Relation compose(const Relation& o) const {
    assert(size_ == o.size_);
    Relation r(size_);
    for (EventId a = 0; a < size_; ++a) {
      std::uint64_t* out = &r.bits_[a * stride_];
      for (EventId b = 0; b < size_; ++b) {
        if (!contains(a, b)) continue;
        const std::uint64_t* in = &o.bits_[b * stride_];
        for (std::size_t w = 0; w < stride_; ++w) out[w] |= in[w];
      }
    }
    return r;
  }

  Relation transitive_closure() const {
    Relation r = *this;
    for (EventId k = 0; k < size_; ++k) {
      const std::uint64_t* krow = &r.bits_[k * stride_];
      for (EventId i = 0; i < size_; ++i) {
        if (i == k || !r.contains(i, k)) continue;
        std::uint64_t* irow = &r.bits_[i * stride_];
        for (std::size_t w = 0; w < stride_; ++w) irow[w] |= krow[w];
      }
    }
    return r;
  }

  Relation reflexive_transitive_closure() const {
    Relation r = transitive_closure();
    for (EventId e = 0; e < size_; ++e) r.insert(e, e);
    return r;
  }

  bool irreflexive() const {
    for (EventId e = 0; e < size_; ++e)
      if (contains(e, e)) return false;
    return true;
  }

  bool acyclic() const { return transitive_closure().irreflexive(); }

  /// Restricts both sides to events in s.
  Relation restrict(const EventSet& s) const {
    Relation r = *this;
    for (EventId a = 0; a < size_; ++a)
      for (EventId b = 0; b < size_; ++b)
        if (r.contains(a, b) && (!s.contains(a) || !s.contains(b)))
          r.erase(a, b);
    return r;
  }

 private:
  bool row_empty(EventId a) const {
    for (std::size_t w = 0; w < stride_; ++w)
      if (bits_[a * stride_ + w] != 0) return false;
    return true;
  }

  std::size_t size_ = 0;
  std::size_t stride_ = 0;
  std::vector<std::uint64_t> bits_;
};

}  // namespace axcat

#endif  // AXCAT_RELATION_HPP_
