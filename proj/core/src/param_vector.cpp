#include "mwss/param_vector.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "mwss/errors.hpp"
#include "mwss/hash.hpp"

namespace mwss::nn {

std::size_t Segment::size() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void Layout::add(std::string name, std::vector<std::size_t> shape) {
  if (index_.contains(name)) throw ValidationError("duplicate parameter segment '" + name + "'");
  Segment seg{std::move(name), total_, std::move(shape)};
  total_ += seg.size();
  index_.emplace(seg.name, segments_.size());
  segments_.push_back(std::move(seg));
}

const Segment& Layout::at(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("unknown parameter segment '" + std::string(name) + "'");
  return segments_[it->second];
}

bool Layout::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

std::uint64_t Layout::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& s : segments_) {
    h = fnv1a(s.name, h);
    for (auto d : s.shape) h = fnv1a(std::to_string(d) + ",", h);
    h = fnv1a(";", h);
  }
  return h;
}

const Segment& Layout::owner_of(std::size_t i) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), i,
                             [](std::size_t v, const Segment& s) { return v < s.offset; });
  return *std::prev(it);
}

bool operator==(const Layout& a, const Layout& b) {
  if (a.segments_.size() != b.segments_.size()) return false;
  for (std::size_t i = 0; i < a.segments_.size(); ++i) {
    if (a.segments_[i].name != b.segments_[i].name || a.segments_[i].shape != b.segments_[i].shape) return false;
  }
  return true;
}

ParamVector::ParamVector(std::shared_ptr<const Layout> layout)
    : layout_(std::move(layout)), values_(layout_->total(), 0.0) {}

std::span<double> ParamVector::segment(std::string_view name) {
  const auto& s = layout_->at(name);
  return std::span<double>(values_).subspan(s.offset, s.size());
}

std::span<const double> ParamVector::segment(std::string_view name) const {
  const auto& s = layout_->at(name);
  return std::span<const double>(values_).subspan(s.offset, s.size());
}

void ParamVector::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool ParamVector::same_layout(const ParamVector& other) const {
  if (layout_ == other.layout_) return true;
  if (!layout_ || !other.layout_) return false;
  return *layout_ == *other.layout_;
}

void require_same_layout(const ParamVector& a, const ParamVector& b, std::string_view what) {
  if (!a.same_layout(b)) {
    throw ValidationError(std::string(what) + ": parameter layouts differ (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + " values)");
  }
}

void require_finite(const ParamVector& p, std::string_view what) {
  const auto v = p.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      const auto& seg = p.layout().owner_of(i);
      throw NumericError(std::string(what) + ": non-finite value in segment '" + seg.name + "' at offset " +
                         std::to_string(i - seg.offset));
    }
  }
}

double dot(const ParamVector& a, const ParamVector& b) {
  require_same_layout(a, b, "dot");
  const auto x = a.values();
  const auto y = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const ParamVector& a) { return std::sqrt(dot(a, a)); }

ParamVector sgd_lookahead(const ParamVector& theta, const ParamVector& grad, double step) {
  require_same_layout(theta, grad, "sgd_lookahead");
  ParamVector out = theta;
  auto o = out.values();
  const auto g = grad.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= step * g[i];
  return out;
}

ParamVector perturb(const ParamVector& theta, const ParamVector& direction, double epsilon, Sign sign) {
  if (!(epsilon > 0.0)) throw ValidationError("perturb: epsilon must be positive, got " + std::to_string(epsilon));
  require_same_layout(theta, direction, "perturb");
  ParamVector out = theta;
  auto o = out.values();
  const auto d = direction.values();
  const double s = sign == Sign::plus ? epsilon : -epsilon;
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += s * d[i];
  return out;
}

}  // namespace mwss::nn
