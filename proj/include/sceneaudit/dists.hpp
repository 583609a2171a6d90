#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sceneaudit/errors.hpp"
#include "sceneaudit/features.hpp"
#include "sceneaudit/scene.hpp"

namespace sceneaudit {

struct FitOptions {
  std::size_t min_samples = 20;
  /// KDE sample retention cap. Fits beyond this keep an evenly strided
  /// subsample of the sorted values; the bandwidth still comes from the full
  /// set. Keeps density evaluation affordable on large corpora.
  std::size_t max_stored_samples = 2000;
  std::optional<double> bandwidth;                  // explicit bandwidth for every KDE fit
  std::map<std::string, double> bandwidth_overrides;  // per-feature explicit bandwidths
  double epsilon = 1e-12;  // plausibility floor; also the density of unseen categories

  void validate() const {
    if (min_samples < 1) throw ConfigError("min_samples must be >= 1", "min_samples");
    if (max_stored_samples < 2)
      throw ConfigError("max_stored_samples must be >= 2", "max_stored_samples");
    if (bandwidth && !(*bandwidth > 0.0))
      throw ConfigError("bandwidth must be > 0", "bandwidth");
    for (const auto& [k, v] : bandwidth_overrides) {
      if (!(v > 0.0)) throw ConfigError("bandwidth must be > 0", "bandwidth_overrides." + k);
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must be in (0, 1)", "epsilon");
  }
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& v, double p) {
  double pos = p * static_cast<double>(v.size() - 1);
  std::size_t i = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

/// Silverman's rule: 1.06 * min(std, IQR / 1.34) * n^(-1/5), floored at 1e-6.
inline double silverman_bandwidth(const std::vector<double>& sorted) {
  std::size_t n = sorted.size();
  double mean = 0.0;
  for (double x : sorted) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double sigma = std::min(sd, iqr / 1.34);
  double bw = 1.06 * sigma * std::pow(static_cast<double>(n), -0.2);
  return std::max(bw, 1e-6);
}

}  // namespace detail

class FittedModel;
FittedModel load_model(const std::filesystem::path& path);

/// A one-dimensional distribution fitted to feature values (or written down
/// by hand for manual filters). Learned families expose a density and a
/// plausibility in [epsilon, 1]; manual tables pass their values through
/// unclamped so an exact 0 can exclude a component outright.
class FittedDistribution {
public:
  FittedDistribution() = default;

  /// Gaussian KDE over the samples. Bandwidth follows Silverman's rule
  /// unless given explicitly. Throws UnderFitError below min_samples.
  static FittedDistribution fit_kde(std::vector<double> values, const FitOptions& opts = {},
                                    std::optional<double> bandwidth = std::nullopt) {
    FittedDistribution d;
    d.family_ = DistFamily::kde;
    d.epsilon_ = opts.epsilon;
    if (values.size() < opts.min_samples)
      throw UnderFitError("too few samples for a density fit", values.size(), opts.min_samples);
    for (double v : values)
      if (!std::isfinite(v)) throw ValidationError("density fit requires finite samples");
    std::sort(values.begin(), values.end());
    d.sample_count_ = values.size();
    std::optional<double> bw = bandwidth ? bandwidth : opts.bandwidth;
    d.bandwidth_ = bw ? *bw : detail::silverman_bandwidth(values);
    if (!(d.bandwidth_ > 0.0)) throw ConfigError("bandwidth must be > 0", "bandwidth");
    if (values.size() > opts.max_stored_samples) {
      std::size_t m = opts.max_stored_samples;
      d.samples_.reserve(m);
      for (std::size_t i = 0; i < m; ++i)
        d.samples_.push_back(values[i * (values.size() - 1) / (m - 1)]);
    } else {
      d.samples_ = std::move(values);
    }
    d.modal_density_ = 0.0;
    for (double s : d.samples_) d.modal_density_ = std::max(d.modal_density_, d.density(s));
    return d;
  }

  /// Exact value-frequency table. Probabilities sum to 1.
  static FittedDistribution fit_categorical(const std::vector<double>& values,
                                            const FitOptions& opts = {}) {
    FittedDistribution d;
    d.family_ = DistFamily::categorical;
    d.epsilon_ = opts.epsilon;
    if (values.size() < opts.min_samples)
      throw UnderFitError("too few samples for a categorical fit", values.size(),
                          opts.min_samples);
    std::map<double, std::size_t> counts;
    for (double v : values) {
      if (!std::isfinite(v)) throw ValidationError("categorical fit requires finite samples");
      ++counts[v];
    }
    for (const auto& [v, c] : counts)
      d.table_[v] = static_cast<double>(c) / static_cast<double>(values.size());
    d.sample_count_ = values.size();
    d.modal_density_ = 0.0;
    for (const auto& [v, p] : d.table_) d.modal_density_ = std::max(d.modal_density_, p);
    return d;
  }

  /// Categorical over exactly {0, 1}; any other sample value is rejected.
  static FittedDistribution fit_bernoulli(const std::vector<double>& values,
                                          const FitOptions& opts = {}) {
    for (double v : values) {
      if (v != 0.0 && v != 1.0)
        throw ValidationError("bernoulli fit requires 0/1 samples, got " + std::to_string(v));
    }
    FittedDistribution d = fit_categorical(values, opts);
    d.family_ = DistFamily::bernoulli;
    return d;
  }

  /// Hand-written table in [0, 1] with a default for unlisted values. The
  /// table entries are used as plausibilities directly: no normalization, no
  /// clamping floor, so a 0 entry excludes rather than merely penalizing.
  static FittedDistribution manual(std::map<double, double> table, double default_value = 1.0) {
    FittedDistribution d;
    d.family_ = DistFamily::manual;
    for (const auto& [v, p] : table) {
      if (!std::isfinite(v)) throw ValidationError("manual table keys must be finite");
      if (!(p >= 0.0 && p <= 1.0))
        throw ValidationError("manual table values must be in [0, 1]");
    }
    if (!(default_value >= 0.0 && default_value <= 1.0))
      throw ValidationError("manual default must be in [0, 1]");
    d.table_ = std::move(table);
    d.default_value_ = default_value;
    d.modal_density_ = 1.0;
    return d;
  }

  DistFamily family() const { return family_; }
  const std::vector<double>& samples() const { return samples_; }
  double bandwidth() const { return bandwidth_; }
  const std::map<double, double>& table() const { return table_; }
  double default_value() const { return default_value_; }
  double modal_density() const { return modal_density_; }
  std::size_t sample_count() const { return sample_count_; }
  double epsilon() const { return epsilon_; }

  /// Density (or table mass) at x. KDE sums its Gaussian kernels; table
  /// families look x up exactly, falling back to epsilon (learned) or the
  /// manual default.
  double density(double x) const {
    if (!std::isfinite(x)) throw ValidationError("density query must be finite");
    switch (family_) {
      case DistFamily::kde: {
        double inv = 1.0 / bandwidth_;
        double acc = 0.0;
        for (double s : samples_) {
          double u = (x - s) * inv;
          acc += std::exp(-0.5 * u * u);
        }
        return acc * inv / (std::sqrt(2.0 * std::numbers::pi) *
                            static_cast<double>(samples_.size()));
      }
      case DistFamily::categorical:
      case DistFamily::bernoulli: {
        auto it = table_.find(x);
        return it == table_.end() ? epsilon_ : it->second;
      }
      case DistFamily::manual: {
        auto it = table_.find(x);
        return it == table_.end() ? default_value_ : it->second;
      }
    }
    return epsilon_;
  }

  /// Density normalized by the modal density. Learned families clamp the
  /// result into [epsilon, 1]; a category with no fitted mass floors to
  /// exactly epsilon. Manual tables return their entry as-is.
  double plausibility(double x) const {
    if (family_ == DistFamily::manual) return density(x);
    if (family_ == DistFamily::categorical || family_ == DistFamily::bernoulli) {
      auto it = table_.find(x);
      if (it == table_.end()) return epsilon_;
      return std::clamp(it->second / modal_density_, epsilon_, 1.0);
    }
    return std::clamp(density(x) / modal_density_, epsilon_, 1.0);
  }

  bool operator==(const FittedDistribution&) const = default;

private:
  DistFamily family_ = DistFamily::manual;
  std::vector<double> samples_;  // sorted; possibly a strided subsample
  double bandwidth_ = 0.0;
  std::map<double, double> table_;
  double default_value_ = 1.0;
  double modal_density_ = 1.0;
  std::size_t sample_count_ = 0;
  double epsilon_ = 1e-12;

  friend class FittedModel;
  friend FittedModel load_model(const std::filesystem::path&);
};

/// Fitted distributions keyed by (feature name, class key). The empty class
/// key holds the pooled fit; lookups for a class without its own entry fall
/// back to it.
class FittedModel {
public:
  using Key = std::pair<std::string, std::string>;

  void insert(const std::string& feature, const std::string& class_key, FittedDistribution dist) {
    entries_[{feature, class_key}] = std::move(dist);
  }

  const FittedDistribution* lookup(const std::string& feature, const std::string& class_key,
                                   std::string* used_key = nullptr) const {
    auto it = entries_.find({feature, class_key});
    if (it == entries_.end() && !class_key.empty()) it = entries_.find({feature, std::string{}});
    if (it == entries_.end()) return nullptr;
    if (used_key) *used_key = it->first.second;
    return &it->second;
  }

  const std::map<Key, FittedDistribution>& entries() const { return entries_; }

  bool operator==(const FittedModel&) const = default;

  std::size_t scene_count = 0;
  std::string config_hash;
  /// Classes whose per-class sample count fell below min_samples, folded
  /// into the pooled fit instead. feature -> class labels.
  std::map<std::string, std::vector<std::string>> fallbacks;
  std::size_t min_samples = 20;
  std::size_t max_stored_samples = 2000;

private:
  std::map<Key, FittedDistribution> entries_;
};

namespace detail {

inline std::string hash_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

inline std::string canonical_fit_description(const std::vector<FeatureSpec>& specs,
                                             const FitOptions& opts) {
  std::ostringstream os;
  std::vector<std::string> lines;
  for (const FeatureSpec& s : specs) {
    lines.push_back(std::string(s.name) + ":" + to_string(s.kind) + ":" + to_string(s.family) +
                    ":" + (s.class_conditional ? "1" : "0"));
  }
  std::sort(lines.begin(), lines.end());
  for (const std::string& l : lines) os << l << ";";
  os << "min=" << opts.min_samples << ";max=" << opts.max_stored_samples << ";eps=" << opts.epsilon;
  if (opts.bandwidth) os << ";bw=" << *opts.bandwidth;
  for (const auto& [k, v] : opts.bandwidth_overrides) os << ";bw." << k << "=" << v;
  return os.str();
}

}  // namespace detail

/// Extract every spec's values from the scenes and fit one distribution per
/// (feature, class key), plus the pooled fit. Classes with fewer than
/// min_samples values fall back to the pooled fit and are recorded in the
/// model's fallback notes. Manual-family specs carry no data and are
/// skipped. Deterministic for identical scene sets and specs.
inline FittedModel fit_from_scenes(const std::vector<Scene>& scenes,
                                   const std::vector<FeatureSpec>& specs,
                                   const FitOptions& opts = {}) {
  opts.validate();
  FittedModel model;
  model.scene_count = scenes.size();
  model.config_hash = detail::hash_hex(detail::canonical_fit_description(specs, opts));
  model.min_samples = opts.min_samples;
  model.max_stored_samples = opts.max_stored_samples;

  for (const FeatureSpec& spec : specs) {
    spec.validate();
    if (spec.family == DistFamily::manual) continue;

    std::vector<double> pooled;
    std::map<std::string, std::vector<double>> per_class;
    auto record = [&](double value, const std::string& key) {
      pooled.push_back(value);
      if (spec.class_conditional) per_class[key].push_back(value);
    };

    for (const Scene& scene : scenes) {
      for (const Track& t : scene.tracks) {
        switch (spec.kind) {
          case FeatureKind::observation:
            for (const ObservationBundle& b : t.bundles())
              for (const Observation& o : b.members())
                record(spec.obs_fn(o, scene), class_key_for(spec, o));
            break;
          case FeatureKind::bundle:
            for (const ObservationBundle& b : t.bundles())
              record(spec.bundle_fn(b, scene), class_key_for(spec, b));
            break;
          case FeatureKind::transition:
            for (std::size_t i = 0; i + 1 < t.bundles().size(); ++i)
              record(spec.transition_fn(t.bundles()[i], t.bundles()[i + 1], t, scene),
                     class_key_for(spec, t));
            break;
          case FeatureKind::track:
            record(spec.track_fn(t, scene), class_key_for(spec, t));
            break;
        }
      }
    }

    if (pooled.empty())
      throw UnderFitError("feature '" + spec.name + "' yielded no values from the given scenes", 0,
                          opts.min_samples);

    auto fit_one = [&](std::vector<double> values) {
      std::optional<double> bw;
      auto it = opts.bandwidth_overrides.find(spec.name);
      if (it != opts.bandwidth_overrides.end()) bw = it->second;
      switch (spec.family) {
        case DistFamily::kde: return FittedDistribution::fit_kde(std::move(values), opts, bw);
        case DistFamily::categorical: return FittedDistribution::fit_categorical(values, opts);
        case DistFamily::bernoulli: return FittedDistribution::fit_bernoulli(values, opts);
        case DistFamily::manual: break;
      }
      throw ConfigError("feature '" + spec.name + "' has no learnable family", "family");
    };

    try {
      model.insert(spec.name, "", fit_one(pooled));
    } catch (const UnderFitError& e) {
      throw UnderFitError("feature '" + spec.name + "' has too few samples", e.sample_count(),
                          e.min_samples());
    }
    for (auto& [cls, values] : per_class) {
      if (values.size() >= opts.min_samples) {
        model.insert(spec.name, cls, fit_one(std::move(values)));
      } else {
        model.fallbacks[spec.name].push_back(cls);
      }
    }
  }
  return model;
}

// ---- model persistence ----

inline constexpr const char* kModelFormat = "sceneaudit-model";
inline constexpr int kModelFormatVersion = 1;

inline void save_model(const FittedModel& model, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["format"] = kModelFormat;
  doc["format_version"] = kModelFormatVersion;
  doc["metadata"] = {{"scene_count", model.scene_count},
                     {"config_hash", model.config_hash},
                     {"min_samples", model.min_samples},
                     {"max_stored_samples", model.max_stored_samples},
                     {"fallbacks", model.fallbacks}};
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [key, dist] : model.entries()) {
    nlohmann::json e;
    e["feature"] = key.first;
    e["class_key"] = key.second;
    e["family"] = to_string(dist.family());
    switch (dist.family()) {
      case DistFamily::kde:
        e["samples"] = dist.samples();
        e["bandwidth"] = dist.bandwidth();
        e["modal_density"] = dist.modal_density();
        e["sample_count"] = dist.sample_count();
        e["epsilon"] = dist.epsilon();
        break;
      case DistFamily::categorical:
      case DistFamily::bernoulli: {
        nlohmann::json table = nlohmann::json::array();
        for (const auto& [v, p] : dist.table()) table.push_back({v, p});
        e["table"] = std::move(table);
        e["modal_density"] = dist.modal_density();
        e["sample_count"] = dist.sample_count();
        e["epsilon"] = dist.epsilon();
        break;
      }
      case DistFamily::manual: {
        nlohmann::json table = nlohmann::json::array();
        for (const auto& [v, p] : dist.table()) table.push_back({v, p});
        e["table"] = std::move(table);
        e["default"] = dist.default_value();
        break;
      }
    }
    entries.push_back(std::move(e));
  }
  doc["entries"] = std::move(entries);

  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("failed writing model to '" + path.string() + "'");
}

inline FittedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    if (doc.at("format") != kModelFormat)
      throw FormatError("'" + path.string() + "' is not a model file");
    if (doc.at("format_version") != kModelFormatVersion)
      throw FormatError("unsupported model format version " +
                        doc.at("format_version").dump() + " in '" + path.string() + "'");
    FittedModel model;
    const auto& meta = doc.at("metadata");
    model.scene_count = meta.at("scene_count").get<std::size_t>();
    model.config_hash = meta.at("config_hash").get<std::string>();
    model.min_samples = meta.at("min_samples").get<std::size_t>();
    model.max_stored_samples = meta.at("max_stored_samples").get<std::size_t>();
    model.fallbacks =
        meta.at("fallbacks").get<std::map<std::string, std::vector<std::string>>>();
    for (const auto& e : doc.at("entries")) {
      FittedDistribution d;
      d.family_ = dist_family_from_string(e.at("family").get<std::string>());
      switch (d.family_) {
        case DistFamily::kde:
          d.samples_ = e.at("samples").get<std::vector<double>>();
          d.bandwidth_ = e.at("bandwidth").get<double>();
          d.modal_density_ = e.at("modal_density").get<double>();
          d.sample_count_ = e.at("sample_count").get<std::size_t>();
          d.epsilon_ = e.at("epsilon").get<double>();
          break;
        case DistFamily::categorical:
        case DistFamily::bernoulli:
          for (const auto& row : e.at("table"))
            d.table_[row.at(0).get<double>()] = row.at(1).get<double>();
          d.modal_density_ = e.at("modal_density").get<double>();
          d.sample_count_ = e.at("sample_count").get<std::size_t>();
          d.epsilon_ = e.at("epsilon").get<double>();
          break;
        case DistFamily::manual:
          for (const auto& row : e.at("table"))
            d.table_[row.at(0).get<double>()] = row.at(1).get<double>();
          d.default_value_ = e.at("default").get<double>();
          d.modal_density_ = 1.0;
          break;
      }
      model.insert(e.at("feature").get<std::string>(), e.at("class_key").get<std::string>(),
                   std::move(d));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model file '" + path.string() + "' is malformed: " + e.what());
  }
}

}  // namespace sceneaudit
