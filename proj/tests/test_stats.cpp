#include <doctest.h>

#include "oracles.hpp"
#include "wearable/distance.hpp"
#include "wearable/error.hpp"
#include "wearable/stats.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace wearable;

namespace {

using V = std::vector<double>;

/// Random sample with values on a coarse grid so ties occur.
V tied_sample(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> u(0, 5);
    V v(n);
    for (double& x : v) x = u(rng);
    return v;
}

/// Permutation p by enumerating every subset of the pooled sample.
double permutation_p(const V& a, const V& b) {
    V pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const double observed = oracle::ks_d(a, b);
    const std::size_t n = pooled.size();
    std::size_t hits = 0, total = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
        V x, y;
        for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? x : y).push_back(pooled[i]);
        ++total;
        hits += oracle::ks_d(x, y) >= observed - 1e-12;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

FixedSeries series(const char* date, V slots, int slot_minutes = 60) {
    FixedSeries s;
    s.user_id = "u";
    s.date = parse_date(date);
    s.slot_minutes = slot_minutes;
    s.slots = std::move(slots);
    s.coverage = 1.0;
    return s;
}

}  // namespace

TEST_CASE("ks examples") {
    const V a{1, 2, 3};
    const auto same = ks_test(a, a);
    CHECK(same.d_statistic == 0.0);
    CHECK(same.p_value == 1.0);
    CHECK(ks_test(V{0, 1, 2, 3}, V{10, 11, 12, 13}).d_statistic == 1.0);
    // breakpoints 1,2,3,4: F_a = 1/3, 2/3, 1, 1 and F_b = 0, 1/3, 2/3, 1
    const auto r = ks_test(a, V{2, 3, 4});
    CHECK(r.d_statistic == doctest::Approx(1.0 / 3.0));
    CHECK(r.n1 == 3);
    CHECK(r.n2 == 3);
    CHECK_THROWS_AS(ks_test(V{}, a), ParameterError);
}

TEST_CASE("kolmogorov survival") {
    CHECK(kolmogorov_survival(0.0) == 1.0);
    CHECK(kolmogorov_survival(1.0) == doctest::Approx(0.2699996716735).epsilon(1e-10));
    CHECK(kolmogorov_survival(0.5) == doctest::Approx(0.9639452436648).epsilon(1e-10));
    CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0494).epsilon(0.01));
    CHECK(kolmogorov_survival(10.0) < 1e-80);
    double prev = 1.0;
    for (double l = 0.05; l < 3.0; l += 0.05) {
        const double q = kolmogorov_survival(l);
        CHECK(q <= prev + 1e-15);
        prev = q;
    }
}

TEST_CASE("ks statistic matches ecdf enumeration") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 500; ++t) {
        const std::size_t n1 = 1 + static_cast<std::size_t>(t) % 7, n2 = 1 + static_cast<std::size_t>(t / 7) % 5;
        const auto a = t % 2 ? tied_sample(rng, n1) : oracle::random_vector(rng, n1);
        const auto b = t % 2 ? tied_sample(rng, n2) : oracle::random_vector(rng, n2);
        CHECK(ks_statistic(a, b) == oracle::ks_d(a, b));
    }
}

TEST_CASE("ks is symmetric and rank-invariant") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        const auto a = oracle::random_vector(rng, 15), b = oracle::random_vector(rng, 9, -0.5, 1.5);
        const auto ab = ks_test(a, b), ba = ks_test(b, a);
        CHECK(ab.d_statistic == ba.d_statistic);
        CHECK(ab.p_value == ba.p_value);
        V ea, eb;
        for (double x : a) ea.push_back(std::exp(3 * x) + 7);
        for (double x : b) eb.push_back(std::exp(3 * x) + 7);
        CHECK(ks_statistic(ea, eb) == ab.d_statistic);
    }
}

TEST_CASE("exact permutation p matches subset enumeration") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 30; ++t) {
        const auto a = tied_sample(rng, 2 + static_cast<std::size_t>(t) % 5);
        const auto b = tied_sample(rng, 3 + static_cast<std::size_t>(t) % 4);
        CHECK(ks_permutation_p(a, b) == doctest::Approx(permutation_p(a, b)).epsilon(1e-12));
    }
    CHECK(ks_permutation_p(V{1, 2, 3}, V{1, 2, 3}) == 1.0);
    CHECK(ks_permutation_p(V{1, 2}, V{5, 6}) == doctest::Approx(2.0 / 6.0));
    CHECK_THROWS_AS(ks_permutation_p(V(11, 0.0), V(10, 1.0)), ParameterError);
    CHECK_THROWS_AS(ks_permutation_p(V{}, V{1}), ParameterError);
}

TEST_CASE("correlation examples") {
    const V x{1, 2, 3, 4, 5};
    V y;
    for (double v : x) y.push_back(2 * v + 1);
    const auto c = correlations(x, y);
    CHECK(*c.pearson == doctest::Approx(1.0));
    CHECK(*c.spearman == doctest::Approx(1.0));
    CHECK(*c.kendall_tau == doctest::Approx(1.0));

    const V u{-2, -1, 0, 1, 2}, cube{-8, -1, 0, 1, 8};
    CHECK(spearman(u, cube) == doctest::Approx(1.0));
    CHECK(kendall_tau(u, cube) == doctest::Approx(1.0));
    CHECK(pearson(u, cube) < 1.0);

    CHECK(kendall_tau(V{1, 2, 3}, V{3, 1, 2}) == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("correlation errors") {
    CHECK_THROWS_AS(pearson(V{1, 2, 3}, V{1, 2}), DimensionError);
    CHECK_THROWS_AS(kendall_tau(V{1, 2}, V{1, 2}), InsufficientDataError);
    CHECK_THROWS_AS(pearson(V{1, 1, 1}, V{1, 2, 3}), UndefinedValueError);
    CHECK_THROWS_AS(spearman(V{1, 2, 3}, V{4, 4, 4}), UndefinedValueError);
    CHECK_THROWS_AS(kendall_tau(V{1, 1, 1}, V{1, 2, 3}), UndefinedValueError);
    const auto c = correlations(V{1, 1, 1}, V{1, 2, 3});
    CHECK(!c.pearson);
    CHECK(!c.spearman);
    CHECK(!c.kendall_tau);
    const auto j = to_json(c);
    CHECK(j.at("pearson").is_null());
}

TEST_CASE("average ranks") {
    CHECK(average_ranks(V{10, 20, 20, 5}) == V{2, 3.5, 3.5, 1});
    CHECK(average_ranks(V{3, 3, 3}) == V{2, 2, 2});
}

TEST_CASE("correlations match definitional oracles") {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 3 + static_cast<std::size_t>(t) % 10;
        const auto x = t % 2 ? tied_sample(rng, n) : oracle::random_vector(rng, n);
        const auto y = t % 3 ? tied_sample(rng, n) : oracle::random_vector(rng, n);
        const auto c = correlations(x, y);
        if (is_constant(x) || is_constant(y)) {
            CHECK(!c.pearson);
            continue;
        }
        CHECK(std::abs(*c.pearson - oracle::pearson(x, y)) < 1e-12);
        CHECK(std::abs(*c.spearman - oracle::spearman(x, y)) < 1e-12);
        CHECK(std::abs(*c.kendall_tau - oracle::kendall_tau_b(x, y)) < 1e-12);
    }
}

TEST_CASE("correlations are symmetric and transform-invariant") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 100; ++t) {
        const auto x = oracle::random_vector(rng, 10), y = oracle::random_vector(rng, 10);
        CHECK(pearson(x, y) == doctest::Approx(pearson(y, x)).epsilon(1e-14));
        CHECK(kendall_tau(x, y) == kendall_tau(y, x));
        V affine, mono;
        for (double v : x) {
            affine.push_back(4 * v - 3);
            mono.push_back(std::exp(v) + v * v * v);
        }
        CHECK(pearson(affine, y) == doctest::Approx(pearson(x, y)).epsilon(1e-12));
        CHECK(spearman(mono, y) == spearman(x, y));
        CHECK(kendall_tau(mono, y) == kendall_tau(x, y));
    }
}

TEST_CASE("bucket stats merge equals sequential add") {
    std::mt19937_64 rng(1);
    const auto v = oracle::random_vector(rng, 50, 40, 120);
    BucketStats all, left, right;
    for (std::size_t i = 0; i < v.size(); ++i) {
        all.add(v[i]);
        (i < 20 ? left : right).add(v[i]);
    }
    left.merge(right);
    CHECK(left.n == all.n);
    CHECK(left.mean == doctest::Approx(all.mean).epsilon(1e-12));
    CHECK(left.sd() == doctest::Approx(all.sd()).epsilon(1e-12));
    BucketStats empty;
    empty.merge(all);
    CHECK(empty.mean == all.mean);
    CHECK(BucketStats{}.sd() == 0.0);
}

TEST_CASE("bucket kinds") {
    for (auto k : {BucketKind::HourOfDay, BucketKind::DayOfWeek, BucketKind::DayOfMonth, BucketKind::MonthOfYear}) {
        CHECK(bucket_kind_from_string(to_string(k)) == k);
    }
    CHECK(bucket_count(BucketKind::HourOfDay) == 24);
    CHECK(bucket_count(BucketKind::DayOfWeek) == 7);
    CHECK(bucket_count(BucketKind::DayOfMonth) == 31);
    CHECK(bucket_count(BucketKind::MonthOfYear) == 12);
    CHECK_THROWS_AS(bucket_kind_from_string("fortnight"), ParameterError);
}

TEST_CASE("temporal aggregate") {
    Corpus c;
    c.series = {series("2021-03-07", V(24, 65.0)), series("2021-03-08", V(24, 65.0))};
    const auto hours = temporal_aggregate(c, BucketKind::HourOfDay);
    for (const auto& b : hours.buckets) {
        CHECK(b.mean == 65.0);
        CHECK(b.sd() == 0.0);
        CHECK(b.n == 2);
    }
    CHECK(hours.total() == 48);

    Corpus two;
    two.series = {series("2021-03-07", V(24, 60.0)), series("2021-03-07", V(24, 80.0))};
    two.series[1].user_id = "w";
    const auto week = temporal_aggregate(two, BucketKind::DayOfWeek);
    CHECK(week.buckets[0].mean == 70.0);
    CHECK(week.buckets[0].n == 48);
    CHECK(week.buckets[1].n == 0);
    CHECK(week.argmax() == 0);

    const auto months = temporal_aggregate(c, BucketKind::MonthOfYear);
    CHECK(months.buckets[2].n == 48);
    const auto dom = temporal_aggregate(c, BucketKind::DayOfMonth);
    CHECK(dom.buckets[6].n == 24);
    CHECK(dom.buckets[7].n == 24);
    CHECK(dom.total() == 48);
}

TEST_CASE("temporal aggregate places sub-hour slots") {
    Corpus c;
    V slots(48, 0.0);
    slots[36] = 10;  // 18:00
    slots[37] = 30;  // 18:30
    c.series = {series("2021-01-01", slots, 30)};
    const auto p = temporal_aggregate(c, BucketKind::HourOfDay);
    CHECK(p.buckets[18].mean == 20.0);
    CHECK(p.buckets[18].n == 2);
    CHECK(p.argmax() == 18);
    CHECK_THROWS_AS(TemporalProfile{}.argmax(), InsufficientDataError);
}

TEST_CASE("profile csv") {
    Corpus c;
    c.series = {series("2021-02-03", V(24, 1.0))};
    std::ostringstream out;
    write_profile_csv(out, temporal_aggregate(c, BucketKind::MonthOfYear));
    const auto text = out.str();
    CHECK(text.rfind("bucket,mean,std,n\n1,", 0) == 0);
    CHECK(text.find("\n2,1,0,24\n") != std::string::npos);
}

TEST_CASE("gated comparison") {
    const V a{1, 2, 3, 4, 5};
    const auto same = gated_comparison(a, a);
    CHECK(!same.significant);
    CHECK(!same.mean_difference);
    CHECK(to_json(same).at("effect") == "suppressed");

    V lo, hi;
    for (int i = 0; i < 20; ++i) {
        lo.push_back(i);
        hi.push_back(100 + i);
    }
    const auto apart = gated_comparison(lo, hi);
    CHECK(apart.ks.d_statistic == 1.0);
    CHECK(apart.ks.p_value < 0.05);
    CHECK(apart.significant);
    CHECK(*apart.mean_difference == doctest::Approx(100.0));
    CHECK(to_json(apart).at("mean_difference") == 100.0);

    CHECK(!gated_comparison(lo, hi, 0.0).significant);
    CHECK_THROWS_AS(gated_comparison(lo, hi, 1.5), ParameterError);
}

TEST_CASE("heart rate bands") {
    const auto b = heart_rate_bands(V{55, 60, 75, 100, 101});
    CHECK(b.below == 1);
    CHECK(b.within == 3);
    CHECK(b.above == 1);
    CHECK(b.within_fraction() == doctest::Approx(0.6));
    CHECK(heart_rate_bands(V{}).within_fraction() == 0.0);
    CHECK_THROWS_AS(heart_rate_bands(V{1}, 100, 60), ParameterError);
}
