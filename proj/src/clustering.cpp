#include "nilm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace nilm {

std::vector<std::vector<int>> Clustering::members() const {
    std::vector<std::vector<int>> m(centers.size());
    for (std::size_t i = 0; i < assignment.size(); ++i)
        m[static_cast<std::size_t>(assignment[i])].push_back(static_cast<int>(i));
    return m;
}

namespace {

int nearest_center(const Vec6& p, const std::vector<Vec6>& centers) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const double d = squared_distance(p, centers[k]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(k);
        }
    }
    return best;
}

// Farthest-point seeding: first center picked by the RNG, each further center
// is the point with maximal distance to the chosen set.
std::vector<Vec6> seed_centers(const std::vector<Vec6>& points, int k, std::mt19937_64& rng) {
    std::vector<Vec6> centers;
    centers.reserve(static_cast<std::size_t>(k));
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    centers.push_back(points[pick(rng)]);
    std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
    while (static_cast<int>(centers.size()) < k) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            dist[i] = std::min(dist[i], squared_distance(points[i], centers.back()));
            if (dist[i] > far_d) {
                far_d = dist[i];
                far = i;
            }
        }
        centers.push_back(points[far]);
    }
    return centers;
}

Clustering lloyd_once(const std::vector<Vec6>& points, int k, std::mt19937_64& rng) {
    Clustering c;
    c.centers = seed_centers(points, k, rng);
    c.assignment.assign(points.size(), 0);

    double prev_objective = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 300; ++iter) {
        // Assignment step.
        double objective = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            c.assignment[i] = nearest_center(points[i], c.centers);
            objective += squared_distance(points[i], c.centers[static_cast<std::size_t>(c.assignment[i])]);
        }
        if (objective > prev_objective * (1.0 + 1e-12) + 1e-12)
            throw std::logic_error("kmeans: objective increased across an iteration");
        const bool converged = objective >= prev_objective * (1.0 - 1e-12) - 1e-12;
        c.objective = objective;
        prev_objective = objective;

        // Update step; empty clusters are reseeded at the farthest point.
        std::vector<Vec6> sums(static_cast<std::size_t>(k));
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            sums[static_cast<std::size_t>(c.assignment[i])] += points[i];
            ++counts[static_cast<std::size_t>(c.assignment[i])];
        }
        for (int j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] > 0) {
                c.centers[static_cast<std::size_t>(j)] =
                    sums[static_cast<std::size_t>(j)] * (1.0 / counts[static_cast<std::size_t>(j)]);
            } else {
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < points.size(); ++i) {
                    const double d =
                        squared_distance(points[i], c.centers[static_cast<std::size_t>(c.assignment[i])]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                c.centers[static_cast<std::size_t>(j)] = points[far];
            }
        }
        if (converged) break;
    }

    // Final assignment against the last update.
    double objective = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        c.assignment[i] = nearest_center(points[i], c.centers);
        objective += squared_distance(points[i], c.centers[static_cast<std::size_t>(c.assignment[i])]);
    }
    c.objective = objective;
    return c;
}

// Drop empty clusters so downstream index math stays valid.
void compact(Clustering& c) {
    std::vector<int> counts(c.centers.size(), 0);
    for (int a : c.assignment) ++counts[static_cast<std::size_t>(a)];
    std::vector<int> remap(c.centers.size(), -1);
    std::vector<Vec6> centers;
    for (std::size_t j = 0; j < c.centers.size(); ++j) {
        if (counts[j] > 0) {
            remap[j] = static_cast<int>(centers.size());
            centers.push_back(c.centers[j]);
        }
    }
    if (centers.size() == c.centers.size()) return;
    for (int& a : c.assignment) a = remap[static_cast<std::size_t>(a)];
    c.centers = std::move(centers);
}

} // namespace

Clustering kmeans(const std::vector<Vec6>& points, int k, std::uint64_t seed, int restarts) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (static_cast<std::size_t>(k) > points.size())
        throw std::invalid_argument("kmeans: k exceeds the number of points");
    if (restarts < 1) restarts = 1;

    Clustering best;
    best.objective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r + 1));
        Clustering c = lloyd_once(points, k, rng);
        if (c.objective < best.objective) best = std::move(c);
    }
    compact(best);
    return best;
}

double calinski_harabasz(const Clustering& clustering, const std::vector<Vec6>& points) {
    const int k = clustering.k();
    if (k < 2) throw std::domain_error("calinski_harabasz: undefined for K < 2");
    const std::size_t n = points.size();

    Vec6 global;
    for (const Vec6& p : points) global += p;
    global *= 1.0 / static_cast<double>(n);

    std::vector<Vec6> means(static_cast<std::size_t>(k));
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
        means[static_cast<std::size_t>(clustering.assignment[i])] += points[i];
        ++counts[static_cast<std::size_t>(clustering.assignment[i])];
    }
    for (int j = 0; j < k; ++j)
        if (counts[static_cast<std::size_t>(j)] > 0)
            means[static_cast<std::size_t>(j)] *= 1.0 / counts[static_cast<std::size_t>(j)];

    double between = 0.0, within = 0.0;
    for (int j = 0; j < k; ++j)
        between += counts[static_cast<std::size_t>(j)] *
                   squared_distance(means[static_cast<std::size_t>(j)], global);
    for (std::size_t i = 0; i < n; ++i)
        within += squared_distance(points[i], means[static_cast<std::size_t>(clustering.assignment[i])]);

    const double prefactor = static_cast<double>(n - static_cast<std::size_t>(k)) / (k - 1);
    if (within == 0.0) return std::numeric_limits<double>::infinity();
    return prefactor * between / within;
}

KSelection select_k(const std::vector<Vec6>& points, int k_max, std::uint64_t seed, int restarts) {
    if (points.size() < 2) throw std::invalid_argument("select_k: need at least 2 points");
    const int upper = std::min<int>(k_max, static_cast<int>(points.size()));

    KSelection sel;
    double best_ch = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= upper; ++k) {
        Clustering c = kmeans(points, k, seed + static_cast<std::uint64_t>(k) * 1000003ULL, restarts);
        if (c.k() < 2) continue; // duplicates collapsed the partition
        const double ch = calinski_harabasz(c, points);
        sel.ch_curve.emplace_back(k, ch);
        if (ch > best_ch) {
            best_ch = ch;
            sel.clustering = std::move(c);
            sel.k_opt = k;
        }
    }
    if (sel.ch_curve.empty()) throw std::runtime_error("select_k: no clustering produced a valid score");

    // Weak-separation diagnostic: the best score barely stands out of the curve.
    std::vector<double> scores;
    for (auto& [k, ch] : sel.ch_curve)
        if (std::isfinite(ch)) scores.push_back(ch);
    if (!scores.empty()) {
        std::sort(scores.begin(), scores.end());
        const double median = scores[scores.size() / 2];
        sel.weak_separation = std::isfinite(best_ch) && median > 0.0 && best_ch < 2.0 * median;
    }
    return sel;
}

OutlierCleaning clean_outliers(const Clustering& clustering, const std::vector<Vec6>& points,
                               double sigma_factor, int k_outlier, std::uint64_t seed) {
    if (clustering.assignment.size() != points.size())
        throw std::invalid_argument("clean_outliers: assignment does not cover the points");

    OutlierCleaning result;
    const auto member_lists = clustering.members();

    std::vector<bool> outlier(points.size(), false);
    for (std::size_t j = 0; j < member_lists.size(); ++j) {
        const auto& m = member_lists[j];
        if (m.empty()) continue;
        double msd = 0.0;
        for (int i : m) msd += squared_distance(points[static_cast<std::size_t>(i)], clustering.centers[j]);
        msd /= static_cast<double>(m.size());
        const double sigma = std::sqrt(msd);
        const double limit = sigma_factor * sigma;
        for (int i : m)
            if (distance(points[static_cast<std::size_t>(i)], clustering.centers[j]) > limit)
                outlier[static_cast<std::size_t>(i)] = true;
    }

    std::vector<int> outlier_idx;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (outlier[i]) outlier_idx.push_back(static_cast<int>(i));
    result.outliers_moved = static_cast<std::int64_t>(outlier_idx.size());
    if (outlier_idx.empty()) {
        result.clustering = clustering;
        return result;
    }

    // Keep non-outlier members, recompute the cleaned centers.
    Clustering cleaned;
    cleaned.assignment.assign(points.size(), -1);
    std::vector<Vec6> sums(clustering.centers.size());
    std::vector<int> counts(clustering.centers.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (outlier[i]) continue;
        const int a = clustering.assignment[i];
        cleaned.assignment[i] = a;
        sums[static_cast<std::size_t>(a)] += points[i];
        ++counts[static_cast<std::size_t>(a)];
    }
    std::vector<int> remap(clustering.centers.size(), -1);
    for (std::size_t j = 0; j < clustering.centers.size(); ++j) {
        if (counts[j] == 0) continue;
        remap[j] = static_cast<int>(cleaned.centers.size());
        cleaned.centers.push_back(sums[j] * (1.0 / counts[j]));
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        if (cleaned.assignment[i] >= 0)
            cleaned.assignment[i] = remap[static_cast<std::size_t>(cleaned.assignment[i])];

    // Recluster the outliers among themselves with a fixed, capped K.
    std::vector<Vec6> outlier_points;
    outlier_points.reserve(outlier_idx.size());
    for (int i : outlier_idx) outlier_points.push_back(points[static_cast<std::size_t>(i)]);
    const int k_extra = std::min<int>(k_outlier, static_cast<int>(outlier_points.size()));
    Clustering extra = kmeans(outlier_points, k_extra, seed, 10);
    const int base = static_cast<int>(cleaned.centers.size());
    for (const Vec6& c : extra.centers) cleaned.centers.push_back(c);
    for (std::size_t j = 0; j < outlier_idx.size(); ++j)
        cleaned.assignment[static_cast<std::size_t>(outlier_idx[j])] = base + extra.assignment[j];
    result.outlier_clusters = extra.k();

    double objective = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        objective += squared_distance(points[i], cleaned.centers[static_cast<std::size_t>(cleaned.assignment[i])]);
    cleaned.objective = objective;
    result.clustering = std::move(cleaned);
    return result;
}

std::vector<int> assign_off_events(const Clustering& clustering, const std::vector<Vec6>& off_signatures) {
    if (clustering.centers.empty()) throw std::logic_error("assign_off_events: empty clustering");
    std::vector<int> assignment;
    assignment.reserve(off_signatures.size());
    for (const Vec6& sig : off_signatures) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < clustering.centers.size(); ++k) {
            const double d = squared_distance(sig, -1.0 * clustering.centers[k]);
            if (d < best_d) { // strict: ties stay with the lowest index
                best_d = d;
                best = static_cast<int>(k);
            }
        }
        assignment.push_back(best);
    }
    return assignment;
}

double pearson6(const Vec6& a, const Vec6& b) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= 6.0;
    mb /= 6.0;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return cov / std::sqrt(va * vb);
}

double ape6(const Vec6& a, const Vec6& b) {
    const double na = a.norm();
    if (na == 0.0) return std::numeric_limits<double>::infinity();
    return (a - b).norm() / na;
}

MergeResult merge_clusters(const Clustering& clustering, double rho_min, double ape_max) {
    if (clustering.k() < 2) throw std::invalid_argument("merge_clusters: need at least 2 clusters");

    struct Candidate {
        int i, j;
        double rho, ape;
    };
    std::vector<Candidate> candidates;
    MergeResult result;

    const auto& centers = clustering.centers;
    for (int i = 0; i < clustering.k(); ++i) {
        for (int j = i + 1; j < clustering.k(); ++j) {
            const double rho = pearson6(centers[static_cast<std::size_t>(i)], centers[static_cast<std::size_t>(j)]);
            if (std::isnan(rho)) {
                result.diagnostics.push_back("pair (" + std::to_string(i) + "," + std::to_string(j) +
                                             ") skipped: constant center, correlation undefined");
                continue;
            }
            // APE is asymmetric; the condition may hold in either argument order.
            const double ape_ij = ape6(centers[static_cast<std::size_t>(i)], centers[static_cast<std::size_t>(j)]);
            const double ape_ji = ape6(centers[static_cast<std::size_t>(j)], centers[static_cast<std::size_t>(i)]);
            if (rho > rho_min && (ape_ij < ape_max || ape_ji < ape_max))
                candidates.push_back({i, j, rho, ape_ij});
        }
    }

    // Highest similarity first: rho descending, APE ascending, then indices.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.rho != b.rho) return a.rho > b.rho;
        if (a.ape != b.ape) return a.ape < b.ape;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    std::vector<bool> consumed(static_cast<std::size_t>(clustering.k()), false);
    std::vector<std::pair<int, int>> merges;
    for (const Candidate& c : candidates) {
        if (consumed[static_cast<std::size_t>(c.i)] || consumed[static_cast<std::size_t>(c.j)]) continue;
        consumed[static_cast<std::size_t>(c.i)] = consumed[static_cast<std::size_t>(c.j)] = true;
        merges.emplace_back(c.i, c.j);
        result.merges.push_back({c.i, c.j, c.rho, c.ape});
    }

    Clustering merged;
    std::vector<int> remap(static_cast<std::size_t>(clustering.k()), -1);
    for (int j = 0; j < clustering.k(); ++j) {
        if (consumed[static_cast<std::size_t>(j)]) continue;
        remap[static_cast<std::size_t>(j)] = static_cast<int>(merged.centers.size());
        merged.centers.push_back(centers[static_cast<std::size_t>(j)]);
    }
    for (const auto& [i, j] : merges) {
        const int idx = static_cast<int>(merged.centers.size());
        merged.centers.push_back(0.5 * (centers[static_cast<std::size_t>(i)] + centers[static_cast<std::size_t>(j)]));
        remap[static_cast<std::size_t>(i)] = idx;
        remap[static_cast<std::size_t>(j)] = idx;
    }
    merged.assignment.reserve(clustering.assignment.size());
    for (int a : clustering.assignment) merged.assignment.push_back(remap[static_cast<std::size_t>(a)]);
    merged.objective = clustering.objective; // centers moved; callers needing it recompute
    result.clustering = std::move(merged);
    return result;
}

} // namespace nilm
