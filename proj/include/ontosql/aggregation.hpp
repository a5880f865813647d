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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ontosql/embedding.hpp"
#include "ontosql/ontology.hpp"

namespace ontosql {

using Point = std::vector<double>;

struct KMeansOptions {
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // largest centroid shift that counts as converged
};

struct KMeansResult {
  std::vector<std::size_t> assignments;  // cluster id per input point
  std::vector<Point> centroids;
  double inertia = 0.0;  // sum of squared distances to assigned centroids
  std::size_t iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeding. Empty clusters are re-seeded
/// with the point farthest from its centroid. Throws std::invalid_argument
/// when k is 0 or exceeds the number of distinct points, or when dimensions
/// differ.
KMeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Mean silhouette with Euclidean distance. Points alone in their cluster
/// score 0. Throws std::invalid_argument unless at least two clusters are
/// non-empty.
double silhouette(const std::vector<Point>& points, const std::vector<std::size_t>& assignments);

struct ClusteringResult {
  std::size_t k = 0;
  std::map<std::string, std::size_t> assignments;
  std::vector<Point> centroids;
  std::vector<std::string> representatives;  // indexed by cluster id
  double silhouette = 0.0;
  std::vector<std::pair<std::size_t, double>> silhouette_by_k;
  std::vector<std::string> warnings;

  std::vector<std::string> members(std::size_t cluster) const;
  std::string to_json() const;
};

/// Sweeps k over [k_min, k_max] and keeps the best silhouette, preferring the
/// smaller k on ties. The representative of a cluster is the member nearest
/// its centroid (ties: smaller name). Duplicate names are clustered once.
/// With fewer distinct names than k_min the run falls back to one cluster per
/// name and records a warning.
ClusteringResult cluster_points(const std::vector<std::string>& names,
                                const std::vector<Point>& points, std::size_t k_min,
                                std::size_t k_max, std::uint64_t seed);

/// Embeds `names` and runs cluster_points.
ClusteringResult select_k_and_cluster(const std::vector<std::string>& names,
                                      EmbeddingProvider& embedder, std::size_t k_min,
                                      std::size_t k_max, std::uint64_t seed);

/// Keeps only the representative domains (with their slots and values).
/// Intents and actions pass through.
OntologyGraph reduce_ontology(const OntologyGraph& graph, const ClusteringResult& clusters);

}  // namespace ontosql
