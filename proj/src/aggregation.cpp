// Copyright 2026 The ontosql Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ontosql/aggregation.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "ontosql/util.hpp"

namespace ontosql {

namespace {

double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// 53 random bits mapped to [0, 1); identical on every platform.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Point> seed_plus_plus(const std::vector<Point>& points, std::size_t k,
                                  std::mt19937_64& rng) {
  std::vector<Point> centroids;
  centroids.push_back(points[uniform_below(rng, points.size())]);
  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = squared_distance(points[i], centroids[0]);
  while (centroids.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = unit_uniform(rng) * total;
      pick = points.size();
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        r -= d2[i];
        if (r < 0.0) break;
      }
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
    }
  }
  return centroids;
}

std::size_t nearest(const Point& p, const std::vector<Point>& centroids, double* dist2 = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist2 != nullptr) *dist2 = best_d;
  return best;
}

}  // namespace

KMeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (k == 0) throw std::invalid_argument("kmeans: k must be >= 1");
  if (points.empty()) throw std::invalid_argument("kmeans: no points");
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("kmeans: points differ in dimension");
  }
  const std::set<Point> distinct(points.begin(), points.end());
  if (k > distinct.size()) {
    throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " exceeds " +
                                std::to_string(distinct.size()) + " distinct points");
  }

  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centroids = seed_plus_plus(points, k, rng);
  result.assignments.assign(points.size(), 0);
  std::vector<double> dist2(points.size());
  bool first = true;

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = nearest(points[i], result.centroids, &dist2[i]);
      if (c != result.assignments[i]) changed = true;
      result.assignments[i] = c;
    }
    if (!changed && !first) break;
    first = false;

    std::vector<Point> next(k, Point(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = result.assignments[i];
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) next[c][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Farthest point from its own centroid moves into the empty cluster.
        std::size_t far = 0;
        for (std::size_t i = 1; i < points.size(); ++i) {
          if (dist2[i] > dist2[far]) far = i;
        }
        next[c] = points[far];
        dist2[far] = 0.0;
        continue;
      }
      for (auto& x : next[c]) x /= static_cast<double>(counts[c]);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(squared_distance(next[c], result.centroids[c])));
    }
    result.centroids = std::move(next);
    if (shift < options.tolerance) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        result.assignments[i] = nearest(points[i], result.centroids, &dist2[i]);
      }
      break;
    }
  }

  result.inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.inertia += squared_distance(points[i], result.centroids[result.assignments[i]]);
  }
  return result;
}

double silhouette(const std::vector<Point>& points, const std::vector<std::size_t>& assignments) {
  if (points.size() != assignments.size()) {
    throw std::invalid_argument("silhouette: one assignment per point required");
  }
  std::map<std::size_t, std::size_t> sizes;
  for (auto a : assignments) ++sizes[a];
  if (sizes.size() < 2) throw std::invalid_argument("silhouette: needs at least two clusters");

  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto own = assignments[i];
    if (sizes[own] == 1) continue;
    std::map<std::size_t, double> sum;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j == i) continue;
      sum[assignments[j]] += std::sqrt(squared_distance(points[i], points[j]));
    }
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [c, n] : sizes) {
      if (c != own) b = std::min(b, sum[c] / static_cast<double>(n));
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(points.size());
}

std::vector<std::string> ClusteringResult::members(std::size_t cluster) const {
  std::vector<std::string> out;
  for (const auto& [name, c] : assignments) {
    if (c == cluster) out.push_back(name);
  }
  return out;
}

std::string ClusteringResult::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["silhouette"] = silhouette;
  auto sweep = nlohmann::ordered_json::array();
  for (const auto& [kk, s] : silhouette_by_k) sweep.push_back({{"k", kk}, {"silhouette", s}});
  j["silhouette_by_k"] = std::move(sweep);
  auto clusters = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < representatives.size(); ++c) {
    clusters.push_back({{"id", c}, {"representative", representatives[c]}, {"members", members(c)}});
  }
  j["clusters"] = std::move(clusters);
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

ClusteringResult cluster_points(const std::vector<std::string>& names,
                                const std::vector<Point>& points, std::size_t k_min,
                                std::size_t k_max, std::uint64_t seed) {
  if (names.size() != points.size()) {
    throw std::invalid_argument("cluster_points: one point per name required");
  }
  if (k_min < 1 || k_min > k_max) {
    throw std::invalid_argument("cluster_points: need 1 <= k_min <= k_max");
  }
  std::map<std::string, Point> unique;
  for (std::size_t i = 0; i < names.size(); ++i) unique.emplace(names[i], points[i]);
  std::vector<std::string> ids;
  std::vector<Point> pts;
  for (auto& [n, p] : unique) {
    ids.push_back(n);
    pts.push_back(p);
  }
  const std::size_t distinct = std::set<Point>(pts.begin(), pts.end()).size();

  ClusteringResult result;
  if (distinct < k_min) {
    result.warnings.push_back("only " + std::to_string(distinct) + " distinct names for k_min=" +
                              std::to_string(k_min) + "; using k=" + std::to_string(distinct));
    k_min = k_max = distinct;
  } else if (distinct < k_max) {
    result.warnings.push_back("k_max=" + std::to_string(k_max) + " lowered to " +
                              std::to_string(distinct) + " distinct names");
    k_max = distinct;
  }
  if (ids.empty()) return result;

  std::optional<KMeansResult> best;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    auto run = kmeans(pts, k, seed);
    const double s = k >= 2 ? silhouette(pts, run.assignments) : 0.0;
    result.silhouette_by_k.emplace_back(k, s);
    if (!best || s > result.silhouette) {
      result.silhouette = s;
      result.k = k;
      best = std::move(run);
    }
  }

  result.centroids = best->centroids;
  result.representatives.assign(result.k, {});
  std::vector<double> best_d(result.k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto c = best->assignments[i];
    result.assignments[ids[i]] = c;
    const double d = squared_distance(pts[i], result.centroids[c]);
    // ids are sorted, so strict < keeps the smaller name on ties.
    if (d < best_d[c]) {
      best_d[c] = d;
      result.representatives[c] = ids[i];
    }
  }
  return result;
}

ClusteringResult select_k_and_cluster(const std::vector<std::string>& names,
                                      EmbeddingProvider& embedder, std::size_t k_min,
                                      std::size_t k_max, std::uint64_t seed) {
  std::vector<Point> points;
  if (!names.empty()) {
    for (const auto& v : embedder.embed(names)) {
      points.emplace_back(v.components().begin(), v.components().end());
    }
  }
  return cluster_points(names, points, k_min, k_max, seed);
}

OntologyGraph reduce_ontology(const OntologyGraph& graph, const ClusteringResult& clusters) {
  const std::set<std::string> keep(clusters.representatives.begin(),
                                   clusters.representatives.end());
  OntologyGraph out = graph;
  for (const auto& d : graph.domains()) {
    if (!keep.contains(d.text())) out.remove_domain(d);
  }
  return out;
}

}  // namespace ontosql
