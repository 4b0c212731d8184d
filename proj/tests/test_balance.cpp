#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "fraudstream/balance.hpp"

using namespace fraudstream;

namespace {

std::vector<LabeledRecord> seeded_records(std::size_t negatives, std::size_t positives,
                                          std::size_t dim, RngSeed seed) {
    Rng rng(seed);
    std::vector<LabeledRecord> out;
    for (std::size_t i = 0; i < negatives; ++i) {
        FeatureVector f(dim);
        for (auto& v : f) v = rng.uniform();
        out.push_back({f, 0});
    }
    for (std::size_t i = 0; i < positives; ++i) {
        FeatureVector f(dim);
        for (auto& v : f) v = rng.uniform();
        out.push_back({f, 1});
    }
    return out;
}

// brute-force k nearest indices among `pool` positions, excluding self
std::vector<std::size_t> brute_nn(const std::vector<FeatureVector>& points, std::size_t self,
                                  std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i == self) continue;
        d.emplace_back(euclidean_distance(points[self], points[i]), i);
    }
    std::sort(d.begin(), d.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < std::min(k, d.size()); ++i) out.push_back(d[i].second);
    return out;
}

// distance from p to the segment [a,b] plus the projection coefficient
std::pair<double, double> segment_residual(const FeatureVector& p, const FeatureVector& a,
                                           const FeatureVector& b) {
    double ab2 = 0.0, ap_ab = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        ab2 += (b[j] - a[j]) * (b[j] - a[j]);
        ap_ab += (p[j] - a[j]) * (b[j] - a[j]);
    }
    const double u = ab2 == 0.0 ? 0.0 : ap_ab / ab2;
    double res2 = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double proj = a[j] + u * (b[j] - a[j]);
        res2 += (p[j] - proj) * (p[j] - proj);
    }
    return {std::sqrt(res2), u};
}

}  // namespace

TEST_CASE("smote: two-point minority forces collinearity") {
    std::vector<LabeledRecord> train;
    for (int i = 0; i < 8; ++i) train.push_back({{5.0 + i, 5.0 - i}, 0});
    train.push_back({{0.0, 0.0}, 1});
    train.push_back({{1.0, 1.0}, 1});

    BalanceConfig cfg;
    cfg.k_neighbors = 1;
    cfg.seed = RngSeed{3};
    const auto out = smote(train, cfg);
    REQUIRE(out.size() == 16);  // 8 majority + 8 minority
    for (std::size_t i = train.size(); i < out.size(); ++i) {
        CHECK(out[i].label == 1);
        const double t = out[i].features[0];
        CHECK(out[i].features[1] == t);  // on the x=y segment
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
    }
}

TEST_CASE("smote: identical minority points give identical synthetics") {
    std::vector<LabeledRecord> train;
    for (int i = 0; i < 6; ++i) train.push_back({{static_cast<double>(i), 1.0}, 0});
    for (int i = 0; i < 3; ++i) train.push_back({{0.25, 0.75}, 1});
    BalanceConfig cfg;
    cfg.k_neighbors = 2;
    cfg.seed = RngSeed{5};
    const auto out = smote(train, cfg);
    for (std::size_t i = train.size(); i < out.size(); ++i) {
        CHECK(out[i].features == FeatureVector{0.25, 0.75});
    }
}

TEST_CASE("smote: seeded run matches a straight-line oracle replaying the draws") {
    const auto train = seeded_records(14, 6, 3, RngSeed{70});
    BalanceConfig cfg;
    cfg.k_neighbors = 3;
    cfg.seed = RngSeed{7};
    const auto out = smote(train, cfg);
    REQUIRE(out.size() == 28);  // 14 majority, minority grows 6 -> 14

    // oracle: same minority points, brute-force neighbour lists, replayed rng
    std::vector<FeatureVector> minority;
    for (const auto& r : train) {
        if (r.label == 1) minority.push_back(r.features);
    }
    Rng rng(cfg.seed);
    for (std::size_t s = 0; s < 8; ++s) {
        const std::size_t i = rng.index(minority.size());
        const auto nn = brute_nn(minority, i, cfg.k_neighbors);
        const std::size_t j = nn[rng.index(nn.size())];
        const double u = rng.uniform();
        FeatureVector expect(3);
        for (int d = 0; d < 3; ++d) {
            expect[d] = minority[i][d] + u * (minority[j][d] - minority[i][d]);
        }
        CHECK(out[train.size() + s].features == expect);
    }
}

TEST_CASE("smote leaves input untouched and hits the exact target") {
    const auto train = seeded_records(40, 9, 2, RngSeed{80});
    const auto copy = train;
    BalanceConfig cfg;
    cfg.seed = RngSeed{9};
    const auto out = smote(train, cfg);
    CHECK(train == copy);
    CHECK(count_positives(out) == 40);
    for (std::size_t i = 0; i < train.size(); ++i) CHECK(out[i] == train[i]);
}

TEST_CASE("smote synthetic points lie on a minority segment") {
    const auto train = seeded_records(30, 12, 4, RngSeed{81});
    std::vector<FeatureVector> minority;
    for (const auto& r : train) {
        if (r.label == 1) minority.push_back(r.features);
    }
    BalanceConfig cfg;
    cfg.seed = RngSeed{10};
    const auto out = smote(train, cfg);
    for (std::size_t s = train.size(); s < out.size(); ++s) {
        bool on_some_segment = false;
        for (std::size_t a = 0; a < minority.size() && !on_some_segment; ++a) {
            for (std::size_t b = 0; b < minority.size(); ++b) {
                if (a == b) continue;
                const auto [res, u] = segment_residual(out[s].features, minority[a], minority[b]);
                if (res < 1e-9 && u >= -1e-12 && u <= 1.0 + 1e-12) {
                    on_some_segment = true;
                    break;
                }
            }
        }
        CHECK(on_some_segment);
    }
}

TEST_CASE("smote config errors") {
    auto train = seeded_records(10, 4, 2, RngSeed{82});
    BalanceConfig cfg;
    cfg.k_neighbors = 4;  // not < minority size
    CHECK_THROWS_AS(smote(train, cfg), ConfigError);
    std::vector<LabeledRecord> single(10, LabeledRecord{{0.0, 0.0}, 0});
    CHECK_THROWS_AS(smote(single, BalanceConfig{}), SingleClassError);
}

TEST_CASE("tomek links: one point per class is a link") {
    std::vector<LabeledRecord> records{{{0.0, 0.0}, 0}, {{1.0, 0.0}, 1}};
    const auto links = tomek_links(records);
    REQUIRE(links.size() == 1);
    CHECK(links[0] == std::pair<std::size_t, std::size_t>{0, 1});
}

TEST_CASE("tomek links: well separated clusters have none") {
    std::vector<LabeledRecord> records;
    for (int i = 0; i < 5; ++i) records.push_back({{0.0 + 0.01 * i, 0.0}, 0});
    for (int i = 0; i < 5; ++i) records.push_back({{100.0 + 0.01 * i, 0.0}, 1});
    CHECK(tomek_links(records).empty());
}

TEST_CASE("tomek links equal the quadratic brute-force oracle") {
    const auto records = seeded_records(18, 12, 2, RngSeed{83});
    const auto links = tomek_links(records);

    // oracle: full O(n^2) mutual-nearest-neighbour enumeration
    std::vector<std::size_t> nn(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        double best = 1e300;
        std::size_t arg = i;
        for (std::size_t j = 0; j < records.size(); ++j) {
            if (j == i) continue;
            const double d = euclidean_distance(records[i].features, records[j].features);
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        nn[i] = arg;
    }
    std::vector<std::pair<std::size_t, std::size_t>> expect;
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = i + 1; j < records.size(); ++j) {
            if (nn[i] == j && nn[j] == i && records[i].label != records[j].label) {
                expect.emplace_back(i, j);
            }
        }
    }
    CHECK(links == expect);
    for (const auto& [i, j] : links) CHECK(records[i].label != records[j].label);
}

TEST_CASE("smote_tomek: separated data reduces to smote") {
    std::vector<LabeledRecord> train;
    for (int i = 0; i < 8; ++i) train.push_back({{static_cast<double>(i), 0.0}, 0});
    for (int i = 0; i < 4; ++i) train.push_back({{static_cast<double>(i) * 0.3, 50.0}, 1});
    BalanceConfig cfg;
    cfg.k_neighbors = 3;
    cfg.seed = RngSeed{12};
    CHECK(smote_tomek(train, cfg) == smote(train, cfg));
}

TEST_CASE("smote_tomek removes both members of a boundary link") {
    // minority already at full balance (no synthesis); one adjacent cross pair
    std::vector<LabeledRecord> records{
        {{0.0, 0.0}, 0}, {{10.0, 0.0}, 0}, {{11.0, 0.0}, 0},
        {{0.4, 0.0}, 1}, {{10.5, 6.0}, 1}, {{11.5, 6.0}, 1},
    };
    BalanceConfig cfg;
    cfg.k_neighbors = 2;
    cfg.seed = RngSeed{13};
    const auto links = tomek_links(records);
    REQUIRE(links.size() == 1);  // (0, 3)
    const auto out = smote_tomek(records, cfg);
    CHECK(out.size() == 4);
    for (const auto& r : out) {
        CHECK(r.features != FeatureVector{0.0, 0.0});
        CHECK(r.features != FeatureVector{0.4, 0.0});
    }
}

TEST_CASE("smote_tomek equals the composition oracle") {
    const auto train = seeded_records(25, 8, 2, RngSeed{84});
    BalanceConfig cfg;
    cfg.seed = RngSeed{14};
    const auto combined = smote(train, cfg);
    const auto links = tomek_links(combined);
    std::set<std::size_t> dropped;
    for (const auto& [i, j] : links) {
        dropped.insert(i);
        dropped.insert(j);
    }
    std::vector<LabeledRecord> expect;
    for (std::size_t i = 0; i < combined.size(); ++i) {
        if (!dropped.count(i)) expect.push_back(combined[i]);
    }
    CHECK(smote_tomek(train, cfg) == expect);
}

TEST_CASE("enn: homogeneous neighbourhoods keep everything") {
    std::vector<LabeledRecord> records;
    for (int i = 0; i < 6; ++i) records.push_back({{static_cast<double>(i), 0.0}, 0});
    for (int i = 0; i < 6; ++i) records.push_back({{static_cast<double>(i), 90.0}, 1});
    CHECK(enn_filter(records).size() == records.size());
}

TEST_CASE("enn: an isolated positive among negatives is removed") {
    std::vector<LabeledRecord> records{
        {{0.0, 0.0}, 1}, {{0.1, 0.0}, 0}, {{0.0, 0.1}, 0}, {{-0.1, 0.0}, 0},
        {{50.0, 50.0}, 1}, {{50.1, 50.0}, 1}, {{50.0, 50.1}, 1},
    };
    const auto out = enn_filter(records, 3);
    CHECK(out.size() == records.size() - 1);
    for (const auto& r : out) CHECK(r.features != FeatureVector{0.0, 0.0});
}

TEST_CASE("enn removals match the brute-force oracle and never touch agreeing records") {
    const auto records = seeded_records(30, 20, 2, RngSeed{85});
    const auto out = enn_filter(records, 3);

    std::vector<LabeledRecord> expect;
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::vector<FeatureVector> pts;
        for (const auto& r : records) pts.push_back(r.features);
        const auto nn = brute_nn(pts, i, 3);
        std::size_t disagree = 0;
        for (auto j : nn) disagree += (records[j].label != records[i].label);
        if (disagree * 2 <= nn.size()) expect.push_back(records[i]);
    }
    CHECK(out == expect);
}

TEST_CASE("smote_enn equals the composition oracle") {
    const auto train = seeded_records(25, 8, 2, RngSeed{86});
    BalanceConfig cfg;
    cfg.seed = RngSeed{15};
    CHECK(smote_enn(train, cfg) == enn_filter(smote(train, cfg), 3));
}

TEST_CASE("adasyn: symmetric r gives near-uniform allocation") {
    // minority points arranged so every one sees the same majority share
    std::vector<LabeledRecord> train;
    for (int i = 0; i < 6; ++i) {
        train.push_back({{static_cast<double>(i), 0.0}, 1});
        train.push_back({{static_cast<double>(i), 0.001}, 0});
        train.push_back({{static_cast<double>(i), -0.001}, 0});
    }
    BalanceConfig cfg;
    cfg.k_neighbors = 2;
    cfg.seed = RngSeed{16};
    const auto alloc = adasyn_allocation(train, cfg);
    const double g_expected = 6.0 / 6.0;  // G = 12 - 6 = 6 over m = 6
    for (auto g : alloc.g) {
        CHECK(std::fabs(static_cast<double>(g) - g_expected) <= 1.0);
    }
}

TEST_CASE("adasyn: interior minority point receives zero") {
    std::vector<LabeledRecord> train;
    // a tight minority cluster: the centre's neighbours are all minority,
    // while two majority points sit right next to one ring point so the
    // overall r-sum stays positive
    train.push_back({{0.0, 0.0}, 1});
    train.push_back({{0.1, 0.0}, 1});
    train.push_back({{-0.1, 0.0}, 1});
    train.push_back({{0.0, 0.1}, 1});
    train.push_back({{0.0, -0.1}, 1});
    train.push_back({{0.12, 0.0001}, 0});
    train.push_back({{0.121, -0.0001}, 0});
    for (int i = 0; i < 10; ++i) train.push_back({{30.0 + i, 0.0}, 0});
    BalanceConfig cfg;
    cfg.k_neighbors = 4;
    cfg.seed = RngSeed{17};
    const auto alloc = adasyn_allocation(train, cfg);
    CHECK(alloc.r[0] == 0.0);
    CHECK(alloc.g[0] == 0);
}

TEST_CASE("adasyn allocation equals the brute-force r/w/g oracle") {
    const auto train = seeded_records(28, 12, 2, RngSeed{87});
    BalanceConfig cfg;
    cfg.k_neighbors = 5;
    cfg.seed = RngSeed{18};
    const auto alloc = adasyn_allocation(train, cfg);

    std::vector<FeatureVector> all;
    std::vector<std::size_t> minority_at;
    for (std::size_t i = 0; i < train.size(); ++i) {
        all.push_back(train[i].features);
        if (train[i].label == 1) minority_at.push_back(i);
    }
    const double G = std::llround(1.0 * 28.0) - 12.0;
    std::vector<double> r(minority_at.size());
    double r_sum = 0.0;
    for (std::size_t mi = 0; mi < minority_at.size(); ++mi) {
        const auto nn = brute_nn(all, minority_at[mi], cfg.k_neighbors);
        std::size_t hits = 0;
        for (auto j : nn) hits += (train[j].label == 0);
        r[mi] = static_cast<double>(hits) / static_cast<double>(cfg.k_neighbors);
        r_sum += r[mi];
    }
    REQUIRE(r_sum > 0.0);
    for (std::size_t mi = 0; mi < minority_at.size(); ++mi) {
        CHECK(alloc.r[mi] == r[mi]);
        CHECK(alloc.w[mi] == r[mi] / r_sum);
        CHECK(alloc.g[mi] ==
              static_cast<std::size_t>(std::llround(r[mi] / r_sum * G)));
    }

    // generation: count matches the allocation, input untouched
    const auto copy = train;
    const auto out = adasyn(train, cfg);
    CHECK(train == copy);
    std::size_t total_g = 0;
    for (auto g : alloc.g) total_g += g;
    CHECK(out.size() == train.size() + total_g);
    // per-point rounding can drift from G by at most m/2
    CHECK(std::fabs(static_cast<double>(total_g) - G) <=
          static_cast<double>(minority_at.size()) / 2.0);
}

TEST_CASE("adasyn uniform fallback when no minority point borders the majority") {
    std::vector<LabeledRecord> train;
    for (int i = 0; i < 8; ++i) train.push_back({{static_cast<double>(i) * 0.01, 0.0}, 1});
    for (int i = 0; i < 14; ++i) train.push_back({{500.0 + i, 0.0}, 0});
    BalanceConfig cfg;
    cfg.k_neighbors = 3;
    cfg.seed = RngSeed{19};
    const auto alloc = adasyn_allocation(train, cfg);
    CHECK(alloc.uniform_fallback);
    for (auto w : alloc.w) CHECK(w == 1.0 / 8.0);
}
