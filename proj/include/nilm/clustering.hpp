#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nilm/vec6.hpp"

namespace nilm {

struct Clustering {
    std::vector<Vec6> centers;
    std::vector<int> assignment; // per input point, index into centers
    double objective = 0.0;      // sum of squared distances to assigned centers

    int k() const { return static_cast<int>(centers.size()); }
    std::vector<std::vector<int>> members() const; // point indices per cluster
};

// Lloyd iteration with farthest-point seeding; best of `restarts` runs wins.
// The within-cluster objective is checked to be non-increasing every iteration.
Clustering kmeans(const std::vector<Vec6>& points, int k, std::uint64_t seed, int restarts = 10);

// Between/within scatter ratio with the (N-K)/(K-1) prefactor. Needs K >= 2.
// Zero within-cluster scatter yields +infinity.
double calinski_harabasz(const Clustering& clustering, const std::vector<Vec6>& points);

struct KSelection {
    Clustering clustering;
    int k_opt = 0;
    std::vector<std::pair<int, double>> ch_curve; // (K, CH) for every scanned K
    bool weak_separation = false;                 // no clear maximum in the CH curve
};

// Scans K = 2..min(k_max, N) and keeps the clustering with the highest score.
KSelection select_k(const std::vector<Vec6>& points, int k_max, std::uint64_t seed, int restarts = 10);

struct OutlierCleaning {
    Clustering clustering;
    std::int64_t outliers_moved = 0;
    int outlier_clusters = 0;
};

// Removes members farther than sigma_factor * sigma_k from their center
// (sigma_k = RMS member distance), reclusters them with fixed K <= k_outlier,
// and appends the resulting clusters. Cleaned centers are recomputed.
OutlierCleaning clean_outliers(const Clustering& clustering, const std::vector<Vec6>& points,
                               double sigma_factor, int k_outlier, std::uint64_t seed);

// Nearest negated center, ties to the lowest cluster index.
std::vector<int> assign_off_events(const Clustering& clustering, const std::vector<Vec6>& off_signatures);

struct MergeRecord {
    int first = 0, second = 0;
    double rho = 0.0, ape = 0.0;
};

struct MergeResult {
    Clustering clustering;
    std::vector<MergeRecord> merges;
    std::vector<std::string> diagnostics; // skipped pairs etc.
};

// Pairs with Pearson rho > rho_min and APE < ape_max (in either argument order)
// are candidates; each cluster merges at most once per pass, with its most
// similar candidate, and merged clusters do not merge again in the same pass.
MergeResult merge_clusters(const Clustering& clustering, double rho_min, double ape_max);

// Pearson correlation of two 6-component vectors; NaN when either is constant.
double pearson6(const Vec6& a, const Vec6& b);

// |a - b| / |a| with Euclidean norms.
double ape6(const Vec6& a, const Vec6& b);

} // namespace nilm
