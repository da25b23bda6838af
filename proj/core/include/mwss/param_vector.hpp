#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mwss::nn {

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::vector<std::size_t> shape;

  std::size_t size() const;
};

/// Ordered map from segment name to a (offset, shape) slice of a flat vector.
/// Segments are appended back to back, so they are disjoint and cover the vector.
class Layout {
 public:
  void add(std::string name, std::vector<std::size_t> shape);

  const Segment& at(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::size_t total() const { return total_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Hash of names and shapes; equal layouts have equal fingerprints.
  std::uint64_t fingerprint() const;

  /// Segment containing flat index i.
  const Segment& owner_of(std::size_t i) const;

  friend bool operator==(const Layout& a, const Layout& b);

 private:
  std::vector<Segment> segments_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::size_t total_ = 0;
};

/// Flat vector of 64-bit reals with a shared, immutable layout.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::shared_ptr<const Layout> layout);

  const Layout& layout() const { return *layout_; }
  const std::shared_ptr<const Layout>& layout_ptr() const { return layout_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> segment(std::string_view name);
  std::span<const double> segment(std::string_view name) const;

  ParamVector zeros_like() const { return ParamVector(layout_); }
  void fill(double v);

  bool same_layout(const ParamVector& other) const;

 private:
  std::shared_ptr<const Layout> layout_;
  std::vector<double> values_;
};

/// Throws ValidationError unless a and b share a layout.
void require_same_layout(const ParamVector& a, const ParamVector& b, std::string_view what);

/// Throws NumericError naming the first segment holding a NaN/Inf.
void require_finite(const ParamVector& p, std::string_view what);

double dot(const ParamVector& a, const ParamVector& b);
double norm2(const ParamVector& a);

/// θ′ = θ − η·g. θ is left untouched.
ParamVector sgd_lookahead(const ParamVector& theta, const ParamVector& grad, double step);

enum class Sign { plus, minus };

/// θ± = θ ± ε·d. ε must be positive.
ParamVector perturb(const ParamVector& theta, const ParamVector& direction, double epsilon, Sign sign);

}  // namespace mwss::nn
