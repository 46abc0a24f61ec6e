#include "docforge/index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "docforge/error.hpp"
#include "docforge/rng.hpp"

namespace docforge {

namespace {

double clamp_distance(double v) {
    return std::clamp(v, -1.0, 1.0);
}

/// Sequential-sum dot product. Every ranked distance flows through this one
/// kernel so exhaustive and partitioned searches agree bit-for-bit.
double row_dot(const VectorStore& store, std::size_t row, const Vector& query) {
    double sum = 0.0;
    for (Eigen::Index d = 0; d < query.size(); ++d) {
        sum += store.vectors()(static_cast<Eigen::Index>(row), d) * query[d];
    }
    return sum;
}

void rank_and_truncate(std::vector<ScoredId>* scored, std::size_t k) {
    std::sort(scored->begin(), scored->end(), [](const ScoredId& a, const ScoredId& b) {
        if (a.distance != b.distance) {
            return a.distance > b.distance;
        }
        return a.id < b.id;
    });
    if (scored->size() > k) {
        scored->resize(k);
    }
}

}  // namespace

std::vector<ScoredId> exact_top_k(const UnitVector& query, const VectorStore& store, std::size_t k) {
    if (store.size() == 0) {
        throw EmptyStore("exact_top_k: store is empty");
    }
    if (k == 0) {
        throw InvalidInput("exact_top_k: k must be >= 1");
    }
    if (query.dimension() != store.dimension()) {
        throw InvalidInput("exact_top_k: query dimension mismatch");
    }
    std::vector<ScoredId> scored(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        scored[i] = {store.ids()[i], clamp_distance(row_dot(store, i, query.values))};
    }
    rank_and_truncate(&scored, k);
    return scored;
}

PartitionedIndex build_partitioned_index(const VectorStore& store, std::size_t num_cells,
                                         std::uint64_t seed) {
    const std::size_t n = store.size();
    if (n == 0) {
        throw EmptyStore("build_partitioned_index: store is empty");
    }
    if (num_cells < 1 || num_cells > n) {
        throw InvalidInput("build_partitioned_index: num_cells must be in [1, n]");
    }
    const Eigen::Index d = store.dimension();
    const Eigen::Index C = static_cast<Eigen::Index>(num_cells);

    // k-means++ style seeding on the sphere: D^2 = 2 - 2 * best similarity
    Rng rng(seed);
    Matrix centroids(C, d);
    centroids.row(0) = store.vectors().row(static_cast<Eigen::Index>(rng.below(n)));
    Vector best_sim = store.vectors() * centroids.row(0).transpose();
    for (Eigen::Index c = 1; c < C; ++c) {
        double total = 0.0;
        std::vector<double> weight(n);
        for (std::size_t i = 0; i < n; ++i) {
            weight[i] = std::max(0.0, 2.0 - 2.0 * best_sim[static_cast<Eigen::Index>(i)]);
            total += weight[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += weight[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(rng.below(n));
        }
        centroids.row(c) = store.vectors().row(static_cast<Eigen::Index>(pick));
        const Vector sims = store.vectors() * centroids.row(c).transpose();
        best_sim = best_sim.cwiseMax(sims);
    }

    std::vector<std::uint32_t> assign(n, 0);
    Matrix sims;
    for (int iter = 0; iter < 25; ++iter) {
        sims.noalias() = store.vectors() * centroids.transpose();  // n x C
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            sims.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
            assign[i] = static_cast<std::uint32_t>(best);
        }
        Matrix sums = Matrix::Zero(C, d);
        std::vector<std::size_t> counts(num_cells, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(assign[i]) += store.vectors().row(static_cast<Eigen::Index>(i));
            ++counts[assign[i]];
        }
        double max_move = 0.0;
        for (Eigen::Index c = 0; c < C; ++c) {
            Vector next;
            if (counts[static_cast<std::size_t>(c)] == 0) {
                // reseed from the point farthest from every current centroid
                std::size_t far = 0;
                double far_sim = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < n; ++i) {
                    const double s = sims.row(static_cast<Eigen::Index>(i)).maxCoeff();
                    if (s < far_sim || (s == far_sim && i < far)) {
                        far_sim = s;
                        far = i;
                    }
                }
                next = store.vectors().row(static_cast<Eigen::Index>(far)).transpose();
            } else {
                next = sums.row(c).transpose();
                const double norm = next.norm();
                if (norm > 0.0) {
                    next /= norm;
                } else {
                    next = centroids.row(c).transpose();
                }
            }
            max_move = std::max(max_move, (next.transpose() - centroids.row(c)).cwiseAbs().maxCoeff());
            centroids.row(c) = next.transpose();
        }
        if (max_move < 1e-6) {
            break;
        }
    }

    PartitionedIndex index;
    index.centroids = std::move(centroids);
    index.cells.resize(num_cells);
    const Matrix final_sims = store.vectors() * index.centroids.transpose();
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::Index best = 0;
        final_sims.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
        index.cells[static_cast<std::size_t>(best)].push_back(static_cast<std::uint32_t>(i));
        index.assignments.emplace(store.ids()[i], static_cast<std::uint32_t>(best));
    }
    return index;
}

std::vector<ScoredId> approx_top_k(const UnitVector& query, const PartitionedIndex& index,
                                   const VectorStore& store, std::size_t k, std::size_t probes) {
    if (store.size() == 0) {
        throw EmptyStore("approx_top_k: store is empty");
    }
    if (k == 0) {
        throw InvalidInput("approx_top_k: k must be >= 1");
    }
    if (probes < 1 || probes > index.num_cells()) {
        throw InvalidInput("approx_top_k: probes must be in [1, num_cells]");
    }
    const Vector cell_scores = index.centroids * query.values;
    std::vector<std::size_t> order(index.num_cells());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double sa = cell_scores[static_cast<Eigen::Index>(a)];
        const double sb = cell_scores[static_cast<Eigen::Index>(b)];
        if (sa != sb) {
            return sa > sb;
        }
        return a < b;
    });

    std::vector<ScoredId> scored;
    for (std::size_t p = 0; p < probes; ++p) {
        for (const std::uint32_t row : index.cells[order[p]]) {
            scored.push_back({store.ids()[row], clamp_distance(row_dot(store, row, query.values))});
        }
    }
    rank_and_truncate(&scored, k);
    return scored;
}

std::size_t probes_for_coverage(const UnitVector& query, const PartitionedIndex& index,
                                std::size_t needed, std::size_t min_probes) {
    const Vector cell_scores = index.centroids * query.values;
    std::vector<std::size_t> order(index.num_cells());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double sa = cell_scores[static_cast<Eigen::Index>(a)];
        const double sb = cell_scores[static_cast<Eigen::Index>(b)];
        if (sa != sb) {
            return sa > sb;
        }
        return a < b;
    });
    std::size_t covered = 0;
    std::size_t probes = std::min(std::max<std::size_t>(min_probes, 1), index.num_cells());
    for (std::size_t p = 0; p < index.num_cells(); ++p) {
        covered += index.cells[order[p]].size();
        if (p + 1 >= probes && covered >= needed) {
            return std::max(p + 1, probes);
        }
    }
    return index.num_cells();
}

DistanceStats distance_stats(std::span<const double> distances, const std::string& keyword) {
    if (distances.empty()) {
        throw InvalidInput("distance_stats: empty distance list");
    }
    for (const double d : distances) {
        if (!(d >= -1.0 && d <= 1.0)) {
            throw InvalidInput("distance_stats: distance outside [-1, 1]");
        }
    }
    double sum = 0.0;
    for (const double d : distances) {
        sum += d;
    }
    const double mean = sum / static_cast<double>(distances.size());
    double sq = 0.0;
    for (const double d : distances) {
        sq += (d - mean) * (d - mean);
    }
    DistanceStats out;
    out.keyword = keyword;
    out.mean = mean;
    out.stddev = std::sqrt(sq / static_cast<double>(distances.size()));
    out.count = distances.size();
    return out;
}

}  // namespace docforge
