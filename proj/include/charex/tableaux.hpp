#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "charex/errors.hpp"

namespace charex {

// Integer partition lambda_1 >= lambda_2 >= ... > 0, stored without trailing
// zeros.  The empty shape is {}.
class YoungShape {
public:
  YoungShape() = default;
  explicit YoungShape(std::vector<std::int64_t> parts);  // validates + canonicalizes

  static YoungShape parse(const std::string& s);  // "3,1,1"; "" = empty shape
  std::string format() const;

  const std::vector<std::int64_t>& parts() const { return parts_; }
  std::int64_t part(std::size_t i) const { return i < parts_.size() ? parts_[i] : 0; }
  std::size_t rows() const { return parts_.size(); }
  std::int64_t boxes() const { return boxes_; }

  bool operator==(const YoungShape& o) const { return parts_ == o.parts_; }
  bool operator!=(const YoungShape& o) const { return !(*this == o); }
  bool operator<(const YoungShape& o) const;  // graded lexicographic

private:
  std::vector<std::int64_t> parts_;
  std::int64_t boxes_ = 0;
};

// l_i = lambda_i + N - i for i = 1..N; strictly decreasing, nonnegative.
using LSequence = std::vector<std::int64_t>;

LSequence l_sequence(const YoungShape& shape, int N);  // throws ShapeTooTall if rows > N

// Atomic probability measure.  Positions ascending; weights >= 0, sum 1
// within 1e-12.
class DiscreteMeasure {
public:
  DiscreteMeasure(std::vector<double> positions, std::vector<double> weights);
  static DiscreteMeasure dirac(double x) { return DiscreteMeasure({x}, {1.0}); }
  static DiscreteMeasure uniform_atoms(const std::vector<double>& positions);

  const std::vector<double>& positions() const { return pos_; }
  const std::vector<double>& weights() const { return w_; }
  std::size_t size() const { return pos_.size(); }

  double moment(int p) const;        // \int x^p dmu
  double min_position() const { return pos_.front(); }
  double max_position() const { return pos_.back(); }
  double mass_in(double lo, double hi) const;  // mu([lo, hi])

  // Pushforward through a map f (atoms move, weights unchanged; re-sorted).
  template <class F>
  DiscreteMeasure map(F&& f) const {
    std::vector<double> p(pos_.size());
    for (std::size_t i = 0; i < pos_.size(); ++i) p[i] = f(pos_[i]);
    return DiscreteMeasure(std::move(p), w_);
  }

private:
  std::vector<double> pos_, w_;
};

// (1/N) sum_i delta_{l_i / N}.
DiscreteMeasure empirical_measure(const YoungShape& shape, int N);

// C2(lambda) = sum_i lambda_i (lambda_i + 1 - 2 i + N).
std::int64_t casimir_c2(const YoungShape& shape, int N);

// All shapes with at most N rows and |lambda| <= max_boxes, grouped by |lambda|
// ascending and lexicographically ascending on the parts vector within a group.
std::vector<YoungShape> enumerate_shapes(std::int64_t max_boxes, int N);

// Number of partitions of m into at most N parts (enumeration oracle).
std::int64_t partition_count(std::int64_t m, int N);

// Shapes reachable by adding/removing one box while keeping <= N rows.
// Additions first (top row downward), then removals (top row downward).
std::vector<YoungShape> corner_moves(const YoungShape& shape, int N);

}  // namespace charex
