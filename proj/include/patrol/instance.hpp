#pragma once

// Points, weights and the finite metric they live in.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "patrol/error.hpp"

namespace patrol {

/// Dense point index, 0..n-1. Labels are the external identity.
using PointId = std::size_t;

/// Relative slack allowed on the triangle inequality and on symmetry.
inline constexpr double kMetricTolerance = 1e-9;

/// Row-major square matrix of pairwise distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static DistanceMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    DistanceMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) {
        throw ParseError("distance matrix is not square: row " + std::to_string(i) + " has " +
                         std::to_string(rows[i].size()) + " entries, expected " +
                         std::to_string(rows.size()));
      }
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.n_));
    }
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(PointId a, PointId b) const noexcept { return data_[a * n_ + b]; }
  double& operator()(PointId a, PointId b) noexcept { return data_[a * n_ + b]; }

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

enum class ViolationKind {
  asymmetry,
  nonzero_diagonal,
  zero_distance,
  negative_distance,
  non_finite,
  triangle,
};

inline std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::asymmetry: return "asymmetry";
    case ViolationKind::nonzero_diagonal: return "nonzero_diagonal";
    case ViolationKind::zero_distance: return "zero_distance";
    case ViolationKind::negative_distance: return "negative_distance";
    case ViolationKind::non_finite: return "non_finite";
    case ViolationKind::triangle: return "triangle";
  }
  return "unknown";
}

/// One witness of a metric violation. For triangle violations the witness is
/// d(a,c) > d(a,b) + d(b,c); pair-level kinds leave `c` equal to `b`.
struct Violation {
  ViolationKind kind;
  PointId a = 0;
  PointId b = 0;
  PointId c = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Triangle witnesses beyond this many are counted but not stored.
  static constexpr std::size_t kMaxTriangleWitnesses = 64;
  std::size_t triangle_violations_total = 0;

  bool ok() const noexcept { return violations.empty(); }
};

inline std::string describe(const Violation& v, const std::vector<std::string>* labels = nullptr) {
  auto name = [&](PointId p) {
    return labels && p < labels->size() ? (*labels)[p] : std::to_string(p);
  };
  std::ostringstream os;
  os.precision(17);
  switch (v.kind) {
    case ViolationKind::asymmetry:
      os << "asymmetric distance between " << name(v.a) << " and " << name(v.b) << ": " << v.lhs
         << " vs " << v.rhs;
      break;
    case ViolationKind::nonzero_diagonal:
      os << "nonzero self-distance at " << name(v.a) << ": " << v.lhs;
      break;
    case ViolationKind::zero_distance:
      os << "zero distance between distinct points " << name(v.a) << " and " << name(v.b);
      break;
    case ViolationKind::negative_distance:
      os << "negative distance between " << name(v.a) << " and " << name(v.b) << ": " << v.lhs;
      break;
    case ViolationKind::non_finite:
      os << "non-finite distance between " << name(v.a) << " and " << name(v.b);
      break;
    case ViolationKind::triangle:
      os << "triangle inequality violated: d(" << name(v.a) << "," << name(v.c) << ")=" << v.lhs
         << " > d(" << name(v.a) << "," << name(v.b) << ")+d(" << name(v.b) << "," << name(v.c)
         << ")=" << v.rhs;
      break;
  }
  return os.str();
}

/// Checks symmetry, zero diagonal, positive off-diagonal entries and the
/// triangle inequality (relative tolerance `tol`). Never throws.
inline ValidationReport validate_metric(const DistanceMatrix& dist, double tol = kMetricTolerance) {
  ValidationReport report;
  const std::size_t n = dist.size();
  bool pairs_sane = true;
  for (PointId a = 0; a < n; ++a) {
    const double self = dist(a, a);
    if (!std::isfinite(self)) {
      report.violations.push_back({ViolationKind::non_finite, a, a, a, self, 0.0});
      pairs_sane = false;
    } else if (self != 0.0) {
      report.violations.push_back({ViolationKind::nonzero_diagonal, a, a, a, self, 0.0});
    }
    for (PointId b = a + 1; b < n; ++b) {
      const double ab = dist(a, b);
      const double ba = dist(b, a);
      if (!std::isfinite(ab) || !std::isfinite(ba)) {
        report.violations.push_back({ViolationKind::non_finite, a, b, b, ab, ba});
        pairs_sane = false;
        continue;
      }
      if (std::abs(ab - ba) > tol * std::max(std::abs(ab), std::abs(ba))) {
        report.violations.push_back({ViolationKind::asymmetry, a, b, b, ab, ba});
      }
      if (ab < 0.0 || ba < 0.0) {
        report.violations.push_back({ViolationKind::negative_distance, a, b, b, std::min(ab, ba), 0.0});
        pairs_sane = false;
      } else if (ab == 0.0 || ba == 0.0) {
        report.violations.push_back({ViolationKind::zero_distance, a, b, b, 0.0, 0.0});
      }
    }
  }
  if (!pairs_sane) return report;

  for (PointId a = 0; a < n; ++a) {
    for (PointId c = a + 1; c < n; ++c) {
      const double direct = dist(a, c);
      for (PointId b = 0; b < n; ++b) {
        if (b == a || b == c) continue;
        const double detour = dist(a, b) + dist(b, c);
        if (direct > detour * (1.0 + tol)) {
          ++report.triangle_violations_total;
          if (report.triangle_violations_total <= ValidationReport::kMaxTriangleWitnesses) {
            report.violations.push_back({ViolationKind::triangle, a, b, c, direct, detour});
          }
        }
      }
    }
  }
  return report;
}

/// Thrown when a distance matrix fails validation; carries the full report.
class MetricError : public ValidationError {
 public:
  MetricError(ValidationReport report, const std::vector<std::string>* labels = nullptr)
      : ValidationError(message(report, labels)), report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  static std::string message(const ValidationReport& report, const std::vector<std::string>* labels) {
    std::string msg = "metric violation: ";
    msg += report.violations.empty() ? std::string("unknown") : describe(report.violations.front(), labels);
    if (report.violations.size() > 1) {
      msg += " (+" + std::to_string(report.violations.size() - 1) + " more)";
    }
    return msg;
  }

  ValidationReport report_;
};

/// Immutable weighted finite metric space. Weights are normalized so the
/// largest is exactly 1.
class Instance {
 public:
  Instance(std::vector<std::string> labels, std::vector<double> weights, DistanceMatrix dist,
           double tol = kMetricTolerance)
      : labels_(std::move(labels)), weights_(std::move(weights)), dist_(std::move(dist)) {
    const std::size_t n = labels_.size();
    if (n == 0) throw ValidationError("instance has no points");
    if (weights_.size() != n) {
      throw ValidationError("expected " + std::to_string(n) + " weights, got " +
                            std::to_string(weights_.size()));
    }
    if (dist_.size() != n) {
      throw ValidationError("distance matrix has size " + std::to_string(dist_.size()) +
                            ", expected " + std::to_string(n));
    }
    for (PointId i = 0; i < n; ++i) {
      if (!index_.emplace(labels_[i], i).second) {
        throw ValidationError("duplicate label '" + labels_[i] + "'");
      }
    }
    double max_weight = 0.0;
    for (PointId i = 0; i < n; ++i) {
      const double w = weights_[i];
      if (!std::isfinite(w) || w <= 0.0) {
        throw ValidationError("nonpositive weight " + std::to_string(w) + " at point '" + labels_[i] + "'");
      }
      max_weight = std::max(max_weight, w);
    }
    for (double& w : weights_) w /= max_weight;

    ValidationReport report = validate_metric(dist_, tol);
    if (!report.ok()) throw MetricError(std::move(report), &labels_);
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(PointId p) const { return labels_.at(p); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  double weight(PointId p) const { return weights_.at(p); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double dist(PointId a, PointId b) const noexcept { return dist_(a, b); }
  const DistanceMatrix& distances() const noexcept { return dist_; }

  std::optional<PointId> find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const Instance& other) const {
    return labels_ == other.labels_ && weights_ == other.weights_ && dist_ == other.dist_;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<double> weights_;
  DistanceMatrix dist_;
  std::unordered_map<std::string, PointId> index_;
};

inline std::vector<PointId> all_points(const Instance& inst) {
  std::vector<PointId> pts(inst.size());
  for (PointId i = 0; i < pts.size(); ++i) pts[i] = i;
  return pts;
}

// ---------------------------------------------------------------------------
// Instance document (JSON)

inline DistanceMatrix euclidean_distances(const std::vector<std::pair<double, double>>& coords) {
  DistanceMatrix d(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (std::size_t j = i + 1; j < coords.size(); ++j) {
      const double v = std::hypot(coords[i].first - coords[j].first, coords[i].second - coords[j].second);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

inline Instance instance_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ParseError("instance document must be a JSON object");
    auto labels = doc.at("labels").get<std::vector<std::string>>();
    auto weights = doc.at("weights").get<std::vector<double>>();
    const auto& metric = doc.at("metric");
    const auto type = metric.at("type").get<std::string>();
    DistanceMatrix dist;
    if (type == "explicit") {
      dist = DistanceMatrix::from_rows(metric.at("dist").get<std::vector<std::vector<double>>>());
    } else if (type == "euclidean") {
      std::vector<std::pair<double, double>> coords;
      for (const auto& xy : metric.at("coords")) {
        if (!xy.is_array() || xy.size() != 2) throw ParseError("euclidean coords must be [x, y] pairs");
        coords.emplace_back(xy[0].get<double>(), xy[1].get<double>());
      }
      dist = euclidean_distances(coords);
    } else {
      throw ParseError("unknown metric type '" + type + "'");
    }
    return Instance(std::move(labels), std::move(weights), std::move(dist));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance document: ") + e.what());
  }
}

inline Instance load_instance(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("instance document is not valid JSON: ") + e.what());
  }
  return instance_from_json(doc);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline Instance load_instance_file(const std::string& path) { return load_instance(read_file(path)); }

/// Always emits the explicit form, so load ∘ serialize is the identity.
inline nlohmann::json instance_to_json(const Instance& inst) {
  std::vector<std::vector<double>> rows(inst.size(), std::vector<double>(inst.size()));
  for (PointId i = 0; i < inst.size(); ++i)
    for (PointId j = 0; j < inst.size(); ++j) rows[i][j] = inst.dist(i, j);
  return {{"labels", inst.labels()},
          {"weights", inst.weights()},
          {"metric", {{"type", "explicit"}, {"dist", rows}}}};
}

inline std::string serialize_instance(const Instance& inst) { return instance_to_json(inst).dump(); }

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
inline std::string instance_digest(const Instance& inst) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_instance(inst)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
  return out;
}

// ---------------------------------------------------------------------------
// Random instances

enum class WeightLaw { unit, uniform, dyadic, pareto };
enum class Geometry { euclidean_plane, random_closure };

inline std::optional<WeightLaw> parse_weight_law(std::string_view s) {
  if (s == "unit") return WeightLaw::unit;
  if (s == "uniform") return WeightLaw::uniform;
  if (s == "dyadic") return WeightLaw::dyadic;
  if (s == "pareto") return WeightLaw::pareto;
  return std::nullopt;
}

inline std::string_view to_string(WeightLaw law) {
  switch (law) {
    case WeightLaw::unit: return "unit";
    case WeightLaw::uniform: return "uniform";
    case WeightLaw::dyadic: return "dyadic";
    case WeightLaw::pareto: return "pareto";
  }
  return "unknown";
}

inline std::optional<Geometry> parse_geometry(std::string_view s) {
  if (s == "euclidean-plane") return Geometry::euclidean_plane;
  if (s == "random-closure") return Geometry::random_closure;
  return std::nullopt;
}

inline std::string_view to_string(Geometry g) {
  return g == Geometry::euclidean_plane ? "euclidean-plane" : "random-closure";
}

struct GeneratorSpec {
  std::size_t n = 10;
  WeightLaw weights = WeightLaw::uniform;
  Geometry geometry = Geometry::euclidean_plane;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// libraries, unlike std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound) {
  return static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(bound));
}

}  // namespace detail

/// Deterministic for a fixed (spec, seed) pair.
inline Instance generate_random(const GeneratorSpec& spec, std::uint64_t seed) {
  if (spec.n < 3) throw ValidationError("random instances need n >= 3, got " + std::to_string(spec.n));
  const std::size_t n = spec.n;
  std::mt19937_64 rng(seed);

  DistanceMatrix dist(n);
  if (spec.geometry == Geometry::euclidean_plane) {
    std::vector<std::pair<double, double>> coords(n);
    for (auto& [x, y] : coords) {
      x = detail::unit_uniform(rng);
      y = detail::unit_uniform(rng);
    }
    dist = euclidean_distances(coords);
  } else {
    for (PointId i = 0; i < n; ++i) {
      for (PointId j = i + 1; j < n; ++j) {
        const double c = 1.0 + 9.0 * detail::unit_uniform(rng);
        dist(i, j) = c;
        dist(j, i) = c;
      }
    }
    // Floyd-Warshall closure.
    for (PointId k = 0; k < n; ++k)
      for (PointId i = 0; i < n; ++i)
        for (PointId j = 0; j < n; ++j)
          dist(i, j) = std::min(dist(i, j), dist(i, k) + dist(k, j));
  }

  std::vector<double> weights(n, 1.0);
  const auto classes = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
  for (double& w : weights) {
    switch (spec.weights) {
      case WeightLaw::unit: w = 1.0; break;
      case WeightLaw::uniform: w = 1.0 - detail::unit_uniform(rng); break;
      case WeightLaw::dyadic: w = std::ldexp(1.0, -static_cast<int>(detail::uniform_index(rng, classes))); break;
      case WeightLaw::pareto: w = std::pow(1.0 - detail::unit_uniform(rng), -1.0 / 1.5); break;
    }
  }

  std::vector<std::string> labels(n);
  for (PointId i = 0; i < n; ++i) labels[i] = "p" + std::to_string(i);
  return Instance(std::move(labels), std::move(weights), std::move(dist));
}

}  // namespace patrol
