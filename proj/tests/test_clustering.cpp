#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nilm/clustering.hpp"
#include "test_helpers.hpp"

using namespace nilm;
using namespace nilm::test;

namespace {

std::vector<Vec6> blob(std::mt19937_64& rng, const Vec6& center, double spread, int n) {
    std::normal_distribution<double> d(0.0, spread);
    std::vector<Vec6> pts;
    for (int i = 0; i < n; ++i) {
        Vec6 p = center;
        for (std::size_t c = 0; c < 6; ++c) p[c] += d(rng);
        pts.push_back(p);
    }
    return pts;
}

} // namespace

TEST_CASE("kmeans: identical points collapse to one center with zero objective") {
    std::vector<Vec6> pts(10, v6(4, 4, 4));
    Clustering c = kmeans(pts, 1, 1);
    REQUIRE(c.k() == 1);
    CHECK(c.centers[0] == v6(4, 4, 4));
    CHECK(c.objective == 0.0);
}

TEST_CASE("kmeans: two separated blobs recover the blob means") {
    std::mt19937_64 rng(2);
    auto a = blob(rng, v6(0, 0, 0), 1.0, 50);
    auto b = blob(rng, v6(100, 100, 100), 1.0, 50);
    Vec6 mean_a, mean_b;
    for (const Vec6& p : a) mean_a += p;
    for (const Vec6& p : b) mean_b += p;
    mean_a *= 1.0 / 50;
    mean_b *= 1.0 / 50;

    std::vector<Vec6> pts = a;
    pts.insert(pts.end(), b.begin(), b.end());
    Clustering c = kmeans(pts, 2, 3);
    REQUIRE(c.k() == 2);
    // Match centers to blob means irrespective of label order.
    const bool zero_first = distance(c.centers[0], mean_a) < distance(c.centers[0], mean_b);
    const Vec6& ca = zero_first ? c.centers[0] : c.centers[1];
    const Vec6& cb = zero_first ? c.centers[1] : c.centers[0];
    CHECK(distance(ca, mean_a) < 1e-6);
    CHECK(distance(cb, mean_b) < 1e-6);
}

TEST_CASE("kmeans: K equal to N gives a zero objective") {
    std::mt19937_64 rng(4);
    auto pts = blob(rng, v6(0), 10.0, 12);
    Clustering c = kmeans(pts, 12, 5);
    CHECK(c.objective == doctest::Approx(0.0));
    CHECK(c.k() == 12);
}

TEST_CASE("kmeans: K > N is an argument error") {
    std::vector<Vec6> pts(3, v6(1));
    CHECK_THROWS_AS(kmeans(pts, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(kmeans(pts, 0, 1), std::invalid_argument);
}

TEST_CASE("kmeans is deterministic given the seed") {
    std::mt19937_64 rng(6);
    auto pts = blob(rng, v6(5, 3), 4.0, 80);
    Clustering a = kmeans(pts, 5, 42);
    Clustering b = kmeans(pts, 5, 42);
    CHECK(a.objective == b.objective);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("calinski_harabasz: hand-computed 4-point instance") {
    // Points 0, 1, 100, 101 on channel 0; K=2 split in the middle.
    std::vector<Vec6> pts = {v6(0), v6(1), v6(100), v6(101)};
    Clustering c;
    c.centers = {v6(0.5), v6(100.5)};
    c.assignment = {0, 0, 1, 1};
    // Between = 2*50^2 + 2*50^2 = 10000, within = 4*0.25 = 1, prefactor 2.
    CHECK(calinski_harabasz(c, pts) == doctest::Approx(20000.0));
}

TEST_CASE("calinski_harabasz: positivity, label and translation invariance") {
    std::mt19937_64 rng(8);
    auto pts = blob(rng, v6(10, -3, 2), 5.0, 60);
    Clustering c = kmeans(pts, 3, 7);
    const double ch = calinski_harabasz(c, pts);
    CHECK(ch > 0.0);

    // Swap labels 0 and 1.
    Clustering permuted = c;
    std::swap(permuted.centers[0], permuted.centers[1]);
    for (int& a : permuted.assignment) a = a == 0 ? 1 : (a == 1 ? 0 : a);
    CHECK(calinski_harabasz(permuted, pts) == doctest::Approx(ch));

    // Translate everything.
    const Vec6 shift = v6(1000, -500, 250, 9, 9, 9);
    std::vector<Vec6> moved = pts;
    for (Vec6& p : moved) p += shift;
    Clustering moved_c = c;
    for (Vec6& m : moved_c.centers) m += shift;
    CHECK(calinski_harabasz(moved_c, moved) == doctest::Approx(ch));
}

TEST_CASE("calinski_harabasz: K=1 is undefined, zero scatter returns infinity") {
    std::vector<Vec6> pts = {v6(0), v6(1)};
    Clustering c;
    c.centers = {v6(0.5)};
    c.assignment = {0, 0};
    CHECK_THROWS_AS(calinski_harabasz(c, pts), std::domain_error);

    std::vector<Vec6> two = {v6(0), v6(0), v6(9), v6(9)};
    Clustering z;
    z.centers = {v6(0), v6(9)};
    z.assignment = {0, 0, 1, 1};
    CHECK(std::isinf(calinski_harabasz(z, two)));
}

TEST_CASE("select_k recovers three well-separated device blobs") {
    std::mt19937_64 rng(10);
    std::vector<Vec6> pts;
    std::vector<int> truth;
    const std::vector<Vec6> centers = {v6(2000, 0, 0, 300, 0, 0), v6(0, 5000, 0, 0, 900, 0),
                                       v6(1500, 1500, 1500, 200, 200, 200)};
    for (std::size_t b = 0; b < centers.size(); ++b) {
        for (const Vec6& p : blob(rng, centers[b], 30.0, 60)) {
            pts.push_back(p);
            truth.push_back(static_cast<int>(b));
        }
    }
    KSelection sel = select_k(pts, 50, 5);
    CHECK(sel.k_opt == 3);
    CHECK_FALSE(sel.weak_separation);
}

TEST_CASE("select_k on a single tight blob flags weak separation") {
    std::mt19937_64 rng(12);
    auto pts = blob(rng, v6(100, 100, 100), 5.0, 120);
    KSelection sel = select_k(pts, 12, 5);
    CHECK(sel.weak_separation);
    CHECK(!sel.ch_curve.empty());
}

TEST_CASE("select_k needs at least two points") {
    std::vector<Vec6> one = {v6(1)};
    CHECK_THROWS_AS(select_k(one, 50, 1), std::invalid_argument);
}

TEST_CASE("clean_outliers: no point beyond 2 sigma leaves the clustering unchanged") {
    std::mt19937_64 rng(14);
    // Two symmetric points per cluster: every distance equals sigma.
    std::vector<Vec6> pts = {v6(0), v6(2), v6(50), v6(52)};
    Clustering c;
    c.centers = {v6(1), v6(51)};
    c.assignment = {0, 0, 1, 1};
    OutlierCleaning res = clean_outliers(c, pts, 2.0, 10, 1);
    CHECK(res.outliers_moved == 0);
    CHECK(res.clustering.k() == 2);
    CHECK(res.clustering.assignment == c.assignment);
}

TEST_CASE("clean_outliers: an injected far outlier moves into its own cluster") {
    std::mt19937_64 rng(16);
    auto pts = blob(rng, v6(10, 10, 10), 1.0, 60);
    pts.push_back(v6(500, 500, 500)); // far outlier
    Clustering c = kmeans(pts, 1, 3);
    OutlierCleaning res = clean_outliers(c, pts, 2.0, 10, 5);
    CHECK(res.outliers_moved >= 1);
    CHECK(res.clustering.k() >= 2);
    const int out_cluster = res.clustering.assignment.back();
    CHECK(distance(res.clustering.centers[static_cast<std::size_t>(out_cluster)], v6(500, 500, 500)) < 1.0);
}

TEST_CASE("clean_outliers: outlier cluster count is capped by the outlier count") {
    std::mt19937_64 rng(18);
    auto pts = blob(rng, v6(0, 0, 0), 0.5, 100);
    // Five scattered outliers, far apart from each other.
    pts.push_back(v6(1000));
    pts.push_back(v6(0, 1000));
    pts.push_back(v6(0, 0, 1000));
    pts.push_back(v6(0, 0, 0, 1000));
    pts.push_back(v6(0, 0, 0, 0, 1000));
    Clustering c = kmeans(pts, 1, 3);
    OutlierCleaning res = clean_outliers(c, pts, 2.0, 10, 5);
    CHECK(res.outliers_moved == 5);
    CHECK(res.outlier_clusters <= 5);
}

TEST_CASE("assign_off_events: exact negation and brute-force property") {
    Clustering c;
    c.centers = {v6(100, 0, 0), v6(0, 100, 0), v6(0, 0, 100), v6(50, 50, 0)};
    c.assignment = {};

    CHECK(assign_off_events(c, {-1.0 * c.centers[3]}) == std::vector<int>{3});

    std::mt19937_64 rng(20);
    std::normal_distribution<double> d(0.0, 80.0);
    std::vector<Vec6> sigs;
    for (int i = 0; i < 200; ++i) {
        Vec6 s;
        for (std::size_t ch = 0; ch < 6; ++ch) s[ch] = d(rng);
        sigs.push_back(s);
    }
    const std::vector<int> got = assign_off_events(c, sigs);
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c.centers.size(); ++k) {
            const double dd = squared_distance(sigs[i], -1.0 * c.centers[k]);
            if (dd < best_d) {
                best_d = dd;
                best = static_cast<int>(k);
            }
        }
        CHECK(got[i] == best);
    }
}

TEST_CASE("assign_off_events: tie breaks to the lowest cluster index") {
    Clustering c;
    c.centers = {v6(10, 0), v6(0, 10)};
    // Signature equidistant to both negated centers.
    const std::vector<int> got = assign_off_events(c, {v6(-5, -5)});
    CHECK(got == std::vector<int>{0});
}

TEST_CASE("assign_off_events rejects an empty clustering") {
    Clustering c;
    CHECK_THROWS_AS(assign_off_events(c, {v6(1)}), std::logic_error);
}

TEST_CASE("merge_clusters: identical centers merge, scaled centers do not") {
    Clustering c;
    c.centers = {v6(100, 50, 25, 10, 5, 1), v6(100, 50, 25, 10, 5, 1), v6(200, 100, 50, 20, 10, 2)};
    c.assignment = {0, 1, 2};
    MergeResult res = merge_clusters(c, 0.9, 0.1);
    // Pair (0,1): rho 1, APE 0 -> merge. Pair with the doubled center: rho 1 but APE 1.
    CHECK(res.clustering.k() == 2);
    REQUIRE(res.merges.size() == 1);
    CHECK(res.merges[0].first == 0);
    CHECK(res.merges[0].second == 1);
    CHECK(res.merges[0].ape == doctest::Approx(0.0));
    // Merged center equals the shared center.
    bool found = false;
    for (const Vec6& ctr : res.clustering.centers)
        if (ctr == v6(100, 50, 25, 10, 5, 1)) found = true;
    CHECK(found);
}

TEST_CASE("merge_clusters: three mutually similar clusters merge exactly once") {
    Clustering c;
    c.centers = {v6(100, 50, 30, 10, 5, 2), v6(101, 50, 30, 10, 5, 2), v6(99, 51, 30, 10, 5, 2)};
    c.assignment = {0, 1, 2};
    MergeResult res = merge_clusters(c, 0.9, 0.1);
    CHECK(res.merges.size() == 1);
    CHECK(res.clustering.k() == 2);
}

TEST_CASE("merge_clusters: constant centers are skipped with a diagnostic") {
    Clustering c;
    c.centers = {v6(5, 5, 5, 5, 5, 5), v6(5, 5, 5, 5, 5, 5), v6(80, 10, 0, 0, 0, 0)};
    c.assignment = {0, 1, 2};
    MergeResult res = merge_clusters(c, 0.9, 0.1);
    CHECK(res.merges.empty());
    CHECK(res.diagnostics.size() >= 1);
    CHECK(res.clustering.k() == 3);
}

TEST_CASE("merge_clusters: never increases K, assignments stay consistent") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        std::uniform_int_distribution<int> kd(2, 8);
        const int k = kd(rng);
        Clustering c;
        std::uniform_real_distribution<double> amp(10.0, 1000.0);
        for (int j = 0; j < k; ++j) {
            Vec6 ctr;
            for (std::size_t ch = 0; ch < 6; ++ch) ctr[ch] = amp(rng);
            c.centers.push_back(ctr);
        }
        for (int i = 0; i < 50; ++i) c.assignment.push_back(i % k);
        MergeResult res = merge_clusters(c, 0.9, 0.1);
        CHECK(res.clustering.k() <= k);
        CHECK(res.clustering.k() >= 1);
        for (int a : res.clustering.assignment) {
            CHECK(a >= 0);
            CHECK(a < res.clustering.k());
        }
        // Each original cluster participates in at most one merge.
        std::vector<int> uses(static_cast<std::size_t>(k), 0);
        for (const MergeRecord& m : res.merges) {
            ++uses[static_cast<std::size_t>(m.first)];
            ++uses[static_cast<std::size_t>(m.second)];
        }
        for (int u : uses) CHECK(u <= 1);
    }
}

TEST_CASE("pearson6 and ape6 basics") {
    const Vec6 a = v6(1, 2, 3, 4, 5, 6);
    CHECK(pearson6(a, a) == doctest::Approx(1.0));
    CHECK(pearson6(a, 2.0 * a) == doctest::Approx(1.0));
    CHECK(std::isnan(pearson6(a, v6(7, 7, 7, 7, 7, 7))));
    CHECK(ape6(a, a) == doctest::Approx(0.0));
    CHECK(ape6(a, 2.0 * a) == doctest::Approx(1.0));
}
