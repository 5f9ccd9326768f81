#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nilm/reconstruct.hpp"
#include "nilm/serialize.hpp"
#include "nilm/types.hpp"
#include "test_helpers.hpp"

using namespace nilm;
using namespace nilm::test;

TEST_CASE("densify: zero case and single entry") {
    StateChangesMatrix s;
    s.rows = 3;
    s.cols = 2;
    auto dense = densify(s);
    REQUIRE(dense.size() == 3);
    for (const auto& row : dense)
        for (double v : row) CHECK(v == 0.0);

    s.entries.push_back({1, 0, 1.0});
    dense = densify(s);
    CHECK(dense[1][0] == 1.0);
    CHECK(dense[0][0] == 0.0);
    CHECK(dense[1][1] == 0.0);
}

TEST_CASE("densify/sparsify round-trip on random matrices") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        StateChangesMatrix s;
        s.rows = 40;
        s.cols = 4;
        for (std::int32_t d = 0; d < s.cols; ++d) random_column(rng, s, d);
        s.sort_entries();
        StateChangesMatrix back = sparsify(densify(s), true);
        back.sort_entries();
        REQUIRE(back.entries.size() == s.entries.size());
        for (std::size_t i = 0; i < s.entries.size(); ++i) {
            CHECK(back.entries[i].t == s.entries[i].t);
            CHECK(back.entries[i].device == s.entries[i].device);
            CHECK(back.entries[i].value == s.entries[i].value);
        }
    }
}

TEST_CASE("valid_discrete rejects double switch-on") {
    StateChangesMatrix s;
    s.rows = 10;
    s.cols = 1;
    s.entries = {{1, 0, 1.0}, {3, 0, 1.0}};
    CHECK_FALSE(s.valid_discrete());
    s.entries = {{1, 0, 1.0}, {3, 0, -1.0}, {5, 0, 1.0}};
    CHECK(s.valid_discrete());
}

TEST_CASE("reconstruct: all-zero matrix yields the constant epsilon") {
    StateChangesMatrix s;
    s.rows = 8;
    s.cols = 0;
    const Vec6 c = v6(100, 50, 25, 10, 5, 1);
    PowerSeries out = reconstruct(s, {}, c, 8);
    REQUIRE(out.length() == 8);
    for (const Vec6& p : out.samples) CHECK(p == c);
}

TEST_CASE("reconstruct: single ON/OFF pair replays the profile then cancels") {
    // Hand-summed length-5 toy profile.
    DeviceProfile p;
    p.id = 0;
    p.dynamic = {v6(10, 1), v6(20, 2), v6(30, 3), v6(25, 2), v6(25, 2)};
    p.stable_state = p.dynamic.back();
    StateChangesMatrix s;
    s.rows = 10;
    s.cols = 1;
    s.entries = {{0, 0, 1.0}, {5, 0, -1.0}};
    PowerSeries out = reconstruct(s, {p}, Vec6{}, 10);

    CHECK(out.samples[0] == Vec6{});
    for (std::int64_t k = 1; k <= 5; ++k) CHECK(out.samples[static_cast<std::size_t>(k)] == p.dynamic[static_cast<std::size_t>(k - 1)]);
    for (std::int64_t t = 6; t < 10; ++t) CHECK(out.samples[static_cast<std::size_t>(t)] == Vec6{});
}

TEST_CASE("reconstruct: stable state persists between profile end and OFF") {
    DeviceProfile p;
    p.dynamic = {v6(10), v6(8)};
    p.stable_state = p.dynamic.back();
    StateChangesMatrix s;
    s.rows = 9;
    s.cols = 1;
    s.entries = {{1, 0, 1.0}, {6, 0, -1.0}};
    PowerSeries out = reconstruct(s, {p}, Vec6{}, 9);
    CHECK(out.samples[2][0] == 10.0);
    CHECK(out.samples[3][0] == 8.0);
    for (std::int64_t t = 4; t <= 6; ++t) CHECK(out.samples[static_cast<std::size_t>(t)][0] == 8.0);
    CHECK(out.samples[7][0] == 0.0);
    CHECK(out.samples[8][0] == 0.0);
}

TEST_CASE("reconstruct: early OFF truncates the dynamic part") {
    DeviceProfile p;
    p.dynamic = {v6(10), v6(20), v6(30), v6(40)};
    p.stable_state = p.dynamic.back();
    StateChangesMatrix s;
    s.rows = 8;
    s.cols = 1;
    s.entries = {{0, 0, 1.0}, {2, 0, -1.0}};
    PowerSeries out = reconstruct(s, {p}, Vec6{}, 8);
    CHECK(out.samples[1][0] == 10.0);
    CHECK(out.samples[2][0] == 20.0);
    for (std::int64_t t = 3; t < 8; ++t) CHECK(out.samples[static_cast<std::size_t>(t)][0] == 0.0);
}

TEST_CASE("reconstruct: superposition over disjoint device columns is exact") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const std::int64_t T = 60;
        std::vector<DeviceProfile> profiles = {random_profile(rng, 0), random_profile(rng, 1)};
        StateChangesMatrix both, only_a, only_b;
        for (StateChangesMatrix* m : {&both, &only_a, &only_b}) {
            m->rows = T;
            m->cols = 2;
        }
        random_column(rng, both, 0);
        random_column(rng, both, 1);
        for (const StateChange& e : both.entries)
            (e.device == 0 ? only_a : only_b).entries.push_back(e);
        both.sort_entries();

        const Vec6 eps = v6(7, 7, 7, 7, 7, 7);
        PowerSeries full = reconstruct(both, profiles, eps, T);
        PowerSeries pa = reconstruct(only_a, profiles, eps, T);
        PowerSeries pb = reconstruct(only_b, profiles, eps, T);
        for (std::int64_t t = 0; t < T; ++t) {
            const Vec6 sum = pa.samples[static_cast<std::size_t>(t)] + pb.samples[static_cast<std::size_t>(t)] - eps;
            CHECK(full.samples[static_cast<std::size_t>(t)] == sum); // integer data: bit-exact
        }
    }
}

TEST_CASE("reconstruct agrees with the dense brute-force oracle") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const std::int64_t T = 50;
        std::vector<DeviceProfile> profiles = {random_profile(rng, 0), random_profile(rng, 1),
                                               random_profile(rng, 2)};
        StateChangesMatrix s;
        s.rows = T;
        s.cols = 3;
        for (std::int32_t d = 0; d < 3; ++d) random_column(rng, s, d);
        s.sort_entries();
        std::vector<Vec6> eps(static_cast<std::size_t>(T), v6(3, 1, 4, 1, 5, 9));
        PowerSeries got = reconstruct(s, profiles, eps, T);
        std::vector<Vec6> want = brute_force_reconstruct(s, profiles, eps);
        for (std::int64_t t = 0; t < T; ++t)
            CHECK(got.samples[static_cast<std::size_t>(t)] == want[static_cast<std::size_t>(t)]);
    }
}

TEST_CASE("reconstruct: probabilistic magnitudes at or below 0.1 yield epsilon only") {
    DeviceProfile p;
    p.dynamic = {v6(100), v6(100)};
    p.stable_state = p.dynamic.back();
    StateChangesMatrix s;
    s.rows = 10;
    s.cols = 1;
    s.discrete = false;
    s.entries = {{1, 0, 0.1}, {4, 0, -0.05}, {6, 0, 0.09}};
    const Vec6 eps = v6(42);
    PowerSeries out = reconstruct(s, {p}, eps, 10);
    for (const Vec6& x : out.samples) CHECK(x == eps);
}

TEST_CASE("reconstruct: probabilistic entries scale linearly") {
    DeviceProfile p;
    p.dynamic = {v6(100), v6(80)};
    p.stable_state = p.dynamic.back();
    StateChangesMatrix s;
    s.rows = 6;
    s.cols = 1;
    s.discrete = false;
    s.entries = {{0, 0, 0.5}};
    PowerSeries out = reconstruct(s, {p}, Vec6{}, 6);
    CHECK(out.samples[1][0] == doctest::Approx(50.0));
    CHECK(out.samples[2][0] == doctest::Approx(40.0));
    CHECK(out.samples[3][0] == doctest::Approx(40.0)); // stable continuation, scaled
}

TEST_CASE("reconstruct error paths") {
    StateChangesMatrix s;
    s.rows = 5;
    s.cols = 1;
    CHECK_THROWS_AS(reconstruct(s, {}, Vec6{}, 5), std::length_error);
    CHECK_THROWS_AS(reconstruct(s, {DeviceProfile{}}, Vec6{}, -1), std::invalid_argument);
    s.entries = {{0, 0, 0.5}}; // not an integer mark in a discrete matrix
    DeviceProfile p;
    p.dynamic = {v6(1)};
    CHECK_THROWS_AS(reconstruct(s, {p}, Vec6{}, 5), std::invalid_argument);
}

TEST_CASE("profile and states serialization round-trips") {
    std::mt19937_64 rng(3);
    std::vector<DeviceProfile> profiles = {random_profile(rng, 0), random_profile(rng, 1)};
    const std::string ppath = "test_profiles_roundtrip.json";
    write_profiles_json(ppath, profiles);
    auto back = read_profiles_json(ppath);
    REQUIRE(back.size() == profiles.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].id == profiles[i].id);
        CHECK(back[i].duration() == profiles[i].duration());
        CHECK(back[i].stable_state == profiles[i].stable_state);
        CHECK(back[i].cluster_center == profiles[i].cluster_center);
        for (std::size_t k = 0; k < back[i].dynamic.size(); ++k)
            CHECK(back[i].dynamic[k] == profiles[i].dynamic[k]);
    }

    StateChangesMatrix s;
    s.rows = 100;
    s.cols = 2;
    random_column(rng, s, 0);
    random_column(rng, s, 1);
    s.sort_entries();
    const std::string spath = "test_states_roundtrip.csv";
    write_states_csv(spath, s);
    StateChangesMatrix sback = read_states_csv(spath);
    CHECK(sback.rows == s.rows);
    CHECK(sback.cols == s.cols);
    CHECK(sback.discrete == s.discrete);
    REQUIRE(sback.entries.size() == s.entries.size());
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
        CHECK(sback.entries[i].t == s.entries[i].t);
        CHECK(sback.entries[i].device == s.entries[i].device);
        CHECK(sback.entries[i].value == s.entries[i].value);
    }
}
