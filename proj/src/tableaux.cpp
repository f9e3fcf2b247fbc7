#include "charex/tableaux.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>

namespace charex {

YoungShape::YoungShape(std::vector<std::int64_t> parts) : parts_(std::move(parts)) {
  while (!parts_.empty() && parts_.back() == 0) parts_.pop_back();
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i] < 0) throw InvalidShape("negative part in shape");
    if (i > 0 && parts_[i] > parts_[i - 1])
      throw InvalidShape("parts must be weakly decreasing");
  }
  boxes_ = 0;
  for (auto p : parts_) {
    if (p > std::numeric_limits<std::int64_t>::max() - boxes_)
      throw InvalidShape("box count overflows 64-bit range");
    boxes_ += p;
  }
}

YoungShape YoungShape::parse(const std::string& s) {
  std::vector<std::int64_t> parts;
  std::string trimmed;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
  if (trimmed.empty()) return YoungShape{};
  std::stringstream ss(trimmed);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw InvalidShape("empty component in shape string: '" + s + "'");
    char* end = nullptr;
    errno = 0;
    long long v = std::strtoll(tok.c_str(), &end, 10);
    if (errno != 0 || end == tok.c_str() || *end != '\0')
      throw InvalidShape("cannot parse shape component '" + tok + "'");
    parts.push_back(v);
  }
  return YoungShape(std::move(parts));
}

std::string YoungShape::format() const {
  std::string out;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(parts_[i]);
  }
  return out;
}

bool YoungShape::operator<(const YoungShape& o) const {
  if (boxes_ != o.boxes_) return boxes_ < o.boxes_;
  return parts_ < o.parts_;
}

LSequence l_sequence(const YoungShape& shape, int N) {
  if (N <= 0) throw EmptyInput("l_sequence needs N >= 1");
  if (static_cast<int>(shape.rows()) > N)
    throw ShapeTooTall("shape has " + std::to_string(shape.rows()) + " rows but N = " +
                       std::to_string(N));
  LSequence l(N);
  for (int i = 0; i < N; ++i) l[i] = shape.part(i) + N - 1 - i;
  return l;
}

DiscreteMeasure::DiscreteMeasure(std::vector<double> positions, std::vector<double> weights)
    : pos_(std::move(positions)), w_(std::move(weights)) {
  if (pos_.empty()) throw EmptyInput("measure needs at least one atom");
  if (pos_.size() != w_.size()) throw InvalidMeasure("positions/weights size mismatch");
  std::vector<std::size_t> idx(pos_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pos_[a] < pos_[b]; });
  std::vector<double> p(pos_.size()), w(pos_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    p[i] = pos_[idx[i]];
    w[i] = w_[idx[i]];
  }
  pos_ = std::move(p);
  w_ = std::move(w);
  double total = 0.0;
  for (std::size_t i = 0; i < pos_.size(); ++i) {
    if (!std::isfinite(pos_[i])) throw InvalidMeasure("non-finite atom position");
    if (w_[i] < -1e-15) throw InvalidMeasure("negative atom weight");
    total += w_[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidMeasure("atom weights sum to " + std::to_string(total) + ", expected 1");
}

DiscreteMeasure DiscreteMeasure::uniform_atoms(const std::vector<double>& positions) {
  if (positions.empty()) throw EmptyInput("measure needs at least one atom");
  std::vector<double> w(positions.size(), 1.0 / static_cast<double>(positions.size()));
  return DiscreteMeasure(positions, std::move(w));
}

double DiscreteMeasure::moment(int p) const {
  double s = 0.0;
  for (std::size_t i = 0; i < pos_.size(); ++i) s += w_[i] * std::pow(pos_[i], p);
  return s;
}

double DiscreteMeasure::mass_in(double lo, double hi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < pos_.size(); ++i)
    if (pos_[i] >= lo && pos_[i] <= hi) s += w_[i];
  return s;
}

DiscreteMeasure empirical_measure(const YoungShape& shape, int N) {
  LSequence l = l_sequence(shape, N);
  std::vector<double> pos(l.size());
  for (std::size_t i = 0; i < l.size(); ++i)
    pos[i] = static_cast<double>(l[i]) / static_cast<double>(N);
  return DiscreteMeasure::uniform_atoms(pos);
}

std::int64_t casimir_c2(const YoungShape& shape, int N) {
  if (static_cast<int>(shape.rows()) > N)
    throw ShapeTooTall("casimir_c2: shape taller than N");
  std::int64_t c = 0;
  const auto& parts = shape.parts();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::int64_t row = static_cast<std::int64_t>(i) + 1;
    c += parts[i] * (parts[i] + 1 - 2 * row + N);
  }
  return c;
}

namespace {
void enumerate_rec(std::int64_t remaining, std::int64_t max_part, int rows_left,
                   std::vector<std::int64_t>& prefix, std::vector<YoungShape>& out) {
  if (remaining == 0) {
    std::vector<std::int64_t> parts(prefix);
    std::sort(parts.begin(), parts.end(), std::greater<>());
    out.emplace_back(std::move(parts));
    return;
  }
  if (rows_left == 0) return;
  // first (largest) remaining part, ascending => lexicographic order on the
  // sorted-descending parts vector comes out ascending after the final sort
  std::int64_t lo = (remaining + rows_left - 1) / rows_left;
  for (std::int64_t p = lo; p <= std::min(max_part, remaining); ++p) {
    prefix.push_back(p);
    enumerate_rec(remaining - p, p, rows_left - 1, prefix, out);
    prefix.pop_back();
  }
}
}  // namespace

std::vector<YoungShape> enumerate_shapes(std::int64_t max_boxes, int N) {
  if (N <= 0) throw EmptyInput("enumerate_shapes needs N >= 1");
  if (max_boxes < 0) throw InvalidShape("max_boxes must be >= 0");
  std::vector<YoungShape> out;
  for (std::int64_t m = 0; m <= max_boxes; ++m) {
    std::vector<YoungShape> grade;
    std::vector<std::int64_t> prefix;
    enumerate_rec(m, m, N, prefix, grade);
    std::sort(grade.begin(), grade.end());
    out.insert(out.end(), grade.begin(), grade.end());
  }
  return out;
}

std::int64_t partition_count(std::int64_t m, int N) {
  // q(m, k): partitions of m into parts each <= k; by conjugation this equals
  // partitions into at most k parts.
  if (m < 0) return 0;
  std::vector<std::int64_t> q(m + 1, 0);
  q[0] = 1;
  for (int k = 1; k <= N; ++k)
    for (std::int64_t v = k; v <= m; ++v) q[v] += q[v - k];
  return q[m];
}

std::vector<YoungShape> corner_moves(const YoungShape& shape, int N) {
  if (static_cast<int>(shape.rows()) > N) throw ShapeTooTall("corner_moves: shape taller than N");
  std::vector<YoungShape> out;
  const auto& parts = shape.parts();
  const std::size_t r = parts.size();
  // additions
  for (std::size_t i = 0; i <= r; ++i) {
    if (i == r && static_cast<int>(r) + 1 > N) break;
    if (i < r && i > 0 && parts[i] == parts[i - 1]) continue;  // would break monotonicity
    if (i == r && r > 0 && parts.back() == 0) continue;
    std::vector<std::int64_t> np(parts);
    if (i == r)
      np.push_back(1);
    else
      np[i] += 1;
    if (i > 0 && np[i] > np[i - 1]) continue;
    out.emplace_back(std::move(np));
  }
  // removals
  for (std::size_t i = 0; i < r; ++i) {
    if (i + 1 < r && parts[i] == parts[i + 1]) continue;
    std::vector<std::int64_t> np(parts);
    np[i] -= 1;
    out.emplace_back(std::move(np));
  }
  return out;
}

}  // namespace charex
