#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fraudstream/errors.hpp"

namespace fraudstream {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int df = 0;          // t-test only; -1 when not applicable
    bool degenerate = false;
};

namespace detail {

// regularized incomplete beta I_x(a,b) via Lentz continued fraction;
// relative accuracy well below 1e-8 for the df range used here
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double eps = 3e-14, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs, double mean) {
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return s / static_cast<double>(xs.size() - 1);
}

}  // namespace detail

/// Two-tailed p-value for a Student-t statistic with df degrees of freedom.
inline double student_t_two_tailed(double t, int df) {
    const double dfd = static_cast<double>(df);
    return detail::incomplete_beta(dfd / 2.0, 0.5, dfd / (dfd + t * t));
}

/// Pooled-variance two-tailed two-sample t-test (df = |a|+|b|-2). Zero pooled
/// variance with equal means reports (0, 1); with unequal means it is a
/// degenerate configuration.
inline TestResult two_sample_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw ConfigError("t-test needs at least 2 values per sample");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = detail::mean_of(a), mb = detail::mean_of(b);
    const double va = detail::sample_variance(a, ma), vb = detail::sample_variance(b, mb);
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);

    TestResult r;
    r.df = static_cast<int>(a.size() + b.size()) - 2;
    if (pooled == 0.0) {
        if (ma != mb) {
            throw DegenerateTestError("t-test: zero pooled variance with unequal means");
        }
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.degenerate = true;
        return r;
    }
    r.statistic = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    r.p_value = student_t_two_tailed(r.statistic, r.df);
    return r;
}

/// Paired t-test variant (df = n-1), exposed behind a flag at the CLI.
inline TestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionError("paired t-test: length mismatch");
    if (a.size() < 2) throw ConfigError("paired t-test needs at least 2 pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double md = detail::mean_of(d);
    const double vd = detail::sample_variance(d, md);

    TestResult r;
    r.df = static_cast<int>(a.size()) - 1;
    if (vd == 0.0) {
        if (md != 0.0) throw DegenerateTestError("paired t-test: zero variance, nonzero mean");
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.degenerate = true;
        return r;
    }
    r.statistic = md / std::sqrt(vd / static_cast<double>(a.size()));
    r.p_value = student_t_two_tailed(r.statistic, r.df);
    return r;
}

/// Paired Wilcoxon signed-rank test. Zero differences are dropped; |d| ranks
/// use average ranks on ties; the statistic is W = min(W+, W-). The p-value
/// is exact (full sign enumeration) when at most 12 nonzero differences
/// remain, otherwise a tie-corrected normal approximation with continuity
/// correction 0.5.
inline TestResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionError("wilcoxon: length mismatch");
    if (a.size() < 10) throw ConfigError("wilcoxon: needs at least 10 pairs");

    std::vector<double> absd;
    std::vector<int> sign;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) {
            absd.push_back(std::fabs(d));
            sign.push_back(d > 0.0 ? 1 : -1);
        }
    }
    TestResult r;
    r.df = -1;
    if (absd.empty()) {
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.degenerate = true;
        return r;
    }

    const std::size_t n = absd.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return absd[x] < absd[y]; });

    std::vector<double> rank(n, 0.0);
    double tie_correction = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && absd[order[j + 1]] == absd[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        const double t = static_cast<double>(j - i + 1);
        tie_correction += t * t * t - t;
        for (std::size_t q = i; q <= j; ++q) rank[order[q]] = avg_rank;
        i = j + 1;
    }

    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        (sign[i] > 0 ? w_plus : w_minus) += rank[i];
    }
    r.statistic = std::min(w_plus, w_minus);

    if (n <= 12) {
        // exact two-sided p over all 2^n sign assignments of the observed ranks
        const std::uint32_t total = 1u << n;
        std::uint32_t le = 0, ge = 0;
        for (std::uint32_t mask = 0; mask < total; ++mask) {
            double wp = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (1u << i)) wp += rank[i];
            }
            if (wp <= w_plus + 1e-9) ++le;
            if (wp >= w_plus - 1e-9) ++ge;
        }
        const double p_le = static_cast<double>(le) / static_cast<double>(total);
        const double p_ge = static_cast<double>(ge) / static_cast<double>(total);
        r.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge));
        return r;
    }

    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_correction / 48.0;
    if (var <= 0.0) {
        r.p_value = 1.0;
        r.degenerate = true;
        return r;
    }
    const double z = (r.statistic - mean + 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, 2.0 * detail::normal_cdf(z));
    return r;
}

}  // namespace fraudstream
