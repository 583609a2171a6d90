#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sceneaudit/datagen.hpp"
#include "sceneaudit/engine.hpp"
#include "sceneaudit/errors.hpp"

namespace sceneaudit {

/// Fraction of the first min(k, |ranked|) entries that are true errors.
/// When a report flags fewer than k components, the shorter length is the
/// denominator; an empty ranking scores 0.
inline double precision_at_k(const std::vector<std::string>& ranked,
                             const std::set<std::string>& truth_ids, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1", "k");
  if (ranked.empty()) return 0.0;
  std::size_t m = std::min(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (truth_ids.count(ranked[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(m);
}

/// Fraction of all true errors found within the first k entries. Undefined
/// (and rejected) for empty truth.
inline double recall_at_k(const std::vector<std::string>& ranked,
                          const std::set<std::string>& truth_ids, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1", "k");
  if (truth_ids.empty()) throw ValidationError("recall is undefined for empty ground truth");
  std::size_t m = std::min(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (truth_ids.count(ranked[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth_ids.size());
}

inline std::vector<std::string> ranked_ids(const ErrorReport& report) {
  std::vector<std::string> out;
  out.reserve(report.ranked.size());
  for (const ScoredComponent& c : report.ranked) out.push_back(c.id);
  return out;
}

inline double precision_at_k(const ErrorReport& report, const GroundTruthErrors& truth,
                             std::size_t k) {
  return precision_at_k(ranked_ids(report), truth.all_ids(), k);
}

inline double recall_at_k(const ErrorReport& report, const GroundTruthErrors& truth,
                          std::size_t k) {
  return recall_at_k(ranked_ids(report), truth.all_ids(), k);
}

/// Union of the per-class top-k prefixes of a report: every class label
/// gets its own budget of k slots. The audit workflow reviews candidates
/// class by class, so recall is measured against this selection.
inline std::set<std::string> top_k_per_class(const ErrorReport& report, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1", "k");
  std::set<std::string> out;
  std::map<std::string, std::size_t> taken;
  for (const ScoredComponent& c : report.ranked) {
    if (taken[c.class_key] < k) {
      ++taken[c.class_key];
      out.insert(c.id);
    }
  }
  return out;
}

}  // namespace sceneaudit
