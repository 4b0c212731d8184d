#include <catch2/catch_amalgamated.hpp>

#include "fraudstream/core.hpp"

using namespace fraudstream;

TEST_CASE("euclidean distance basics") {
    CHECK(euclidean_distance({0, 0}, {0, 0}) == 0.0);
    CHECK(euclidean_distance({0, 0}, {3, 4}) == 5.0);
    // sqrt(9 + 16 + 0)
    CHECK(euclidean_distance({1, 2, 3}, {4, 6, 3}) == 5.0);
    CHECK(euclidean_distance({1, 2}, {2, 1}) == euclidean_distance({2, 1}, {1, 2}));
    CHECK_THROWS_AS(euclidean_distance({1, 2}, {1, 2, 3}), DimensionError);
}

TEST_CASE("distance triangle inequality on random triples") {
    Rng rng(RngSeed{12345});
    for (int trial = 0; trial < 1000; ++trial) {
        FeatureVector a(4), b(4), c(4);
        for (int j = 0; j < 4; ++j) {
            a[j] = rng.uniform(-10, 10);
            b[j] = rng.uniform(-10, 10);
            c[j] = rng.uniform(-10, 10);
        }
        const double ab = euclidean_distance(a, b);
        const double bc = euclidean_distance(b, c);
        const double ac = euclidean_distance(a, c);
        CHECK(ac <= ab + bc + 1e-12);
    }
}

TEST_CASE("seeded rng determinism and distinctness") {
    Rng a(RngSeed{42}), b(RngSeed{42});
    for (int i = 0; i < 3; ++i) {
        CHECK(a.uniform() == b.uniform());
    }
    Rng c(RngSeed{42}), d(RngSeed{43});
    bool all_equal = true;
    for (int i = 0; i < 8; ++i) all_equal &= (c.next() == d.next());
    CHECK_FALSE(all_equal);
}

TEST_CASE("rng uniform mean over a million draws") {
    Rng rng(RngSeed{0});
    double sum = 0.0;
    for (int i = 0; i < 1000000; ++i) sum += rng.uniform();
    CHECK_THAT(sum / 1e6, Catch::Matchers::WithinAbs(0.5, 0.01));
}

TEST_CASE("rng helpers stay in range") {
    Rng rng(RngSeed{7});
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.index(10) < 10);
    }
}

TEST_CASE("derive_seed produces distinct child streams") {
    const RngSeed master{99};
    Rng a(derive_seed(master, 0)), b(derive_seed(master, 1));
    bool all_equal = true;
    for (int i = 0; i < 8; ++i) all_equal &= (a.next() == b.next());
    CHECK_FALSE(all_equal);
    Rng c(derive_seed(master, 0));
    Rng d(derive_seed(master, 0));
    CHECK(c.next() == d.next());
}

TEST_CASE("normal draws have plausible moments") {
    Rng rng(RngSeed{5});
    double sum = 0.0, sumsq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(0.0, 0.02));
    CHECK_THAT(sumsq / n, Catch::Matchers::WithinAbs(1.0, 0.02));
}
