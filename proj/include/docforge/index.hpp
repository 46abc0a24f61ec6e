#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "docforge/embedding.hpp"

namespace docforge {

struct ScoredId {
    std::uint64_t id = 0;
    double distance = 0.0;  // dot product in [-1, 1]

    bool operator==(const ScoredId&) const = default;
};

/// Exhaustive dot-product scan; descending distance, ties by ascending id.
std::vector<ScoredId> exact_top_k(const UnitVector& query, const VectorStore& store, std::size_t k);

/// Inverted-file partition: spherical k-means cells, every id in exactly one cell.
struct PartitionedIndex {
    Matrix centroids;                                      // C x d, unit rows
    std::unordered_map<std::uint64_t, std::uint32_t> assignments;  // image id -> cell
    std::vector<std::vector<std::uint32_t>> cells;         // cell -> store row indices
    std::size_t num_cells() const { return cells.size(); }
};

/// 25 Lloyd iterations or max centroid movement < 1e-6; empty cells are
/// reseeded from the point farthest from every centroid. Deterministic
/// under the seed.
PartitionedIndex build_partitioned_index(const VectorStore& store, std::size_t num_cells,
                                         std::uint64_t seed);

/// Scans the `probes` cells nearest to the query by centroid dot product;
/// same ordering rule as exact_top_k.
std::vector<ScoredId> approx_top_k(const UnitVector& query, const PartitionedIndex& index,
                                   const VectorStore& store, std::size_t k, std::size_t probes);

/// Smallest probe count >= min_probes whose best-ranked cells hold at least
/// `needed` items, so deep top-k requests can treat `probes` as a floor.
std::size_t probes_for_coverage(const UnitVector& query, const PartitionedIndex& index,
                                std::size_t needed, std::size_t min_probes);

struct DistanceStats {
    std::string keyword;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
    std::size_t count = 0;
};

DistanceStats distance_stats(std::span<const double> distances, const std::string& keyword);

}  // namespace docforge
