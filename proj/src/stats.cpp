#include "wearable/stats.hpp"

#include "wearable/corpus_io.hpp"
#include "wearable/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace wearable {

namespace {

void require_nonempty(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ParameterError("KS test needs two non-empty samples");
}

void require_pairs(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("correlation inputs differ in length");
    if (x.size() < 3) throw InsufficientDataError("correlation needs at least 3 pairs");
}

std::vector<double> sorted(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return s;
}

double statistic_sorted(const std::vector<double>& a, const std::vector<double>& b) {
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Counts inversions of `v` while merge-sorting it.
std::uint64_t count_swaps(std::vector<double>& v) {
    std::vector<double> buf(v.size());
    std::uint64_t swaps = 0;
    for (std::size_t width = 1; width < v.size(); width *= 2) {
        for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, v.size());
            const std::size_t hi = std::min(lo + 2 * width, v.size());
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[j] < v[i]) {
                    swaps += mid - i;
                    buf[k++] = v[j++];
                } else {
                    buf[k++] = v[i++];
                }
            }
            while (i < mid) buf[k++] = v[i++];
            while (j < hi) buf[k++] = v[j++];
        }
        v.swap(buf);
    }
    return swaps;
}

/// Sum of t(t-1)/2 over runs of equal adjacent values.
template <typename Eq>
std::uint64_t tied_pairs(std::size_t n, Eq equal) {
    std::uint64_t total = 0, run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && equal(i - 1, i)) {
            ++run;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total;
}

}  // namespace

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    require_nonempty(a, b);
    return statistic_sorted(sorted(a), sorted(b));
}

double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    if (lambda < 1.18) {
        // Jacobi theta form converges quickly for small lambda.
        constexpr double pi2 = std::numbers::pi * std::numbers::pi;
        double s = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double odd = 2.0 * k - 1.0;
            s += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> a, std::span<const double> b) {
    require_nonempty(a, b);
    KsResult r;
    r.n1 = a.size();
    r.n2 = b.size();
    r.d_statistic = statistic_sorted(sorted(a), sorted(b));
    const double n1 = static_cast<double>(r.n1), n2 = static_cast<double>(r.n2);
    r.p_value = kolmogorov_survival(std::sqrt(n1 * n2 / (n1 + n2)) * r.d_statistic);
    return r;
}

double ks_permutation_p(std::span<const double> a, std::span<const double> b) {
    require_nonempty(a, b);
    const std::size_t n = a.size() + b.size();
    if (n > kMaxPermutationSize) {
        throw ParameterError("exact permutation p limited to n1 + n2 <= " + std::to_string(kMaxPermutationSize));
    }
    const double observed = statistic_sorted(sorted(a), sorted(b));
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());

    std::vector<bool> in_a(n, false);
    std::fill(in_a.end() - static_cast<std::ptrdiff_t>(a.size()), in_a.end(), true);
    std::uint64_t total = 0, extreme = 0;
    std::vector<double> xa, xb;
    do {
        xa.clear();
        xb.clear();
        for (std::size_t i = 0; i < n; ++i) (in_a[i] ? xa : xb).push_back(pooled[i]);
        std::sort(xa.begin(), xa.end());
        std::sort(xb.begin(), xb.end());
        ++total;
        if (statistic_sorted(xa, xb) >= observed - 1e-12) ++extreme;
    } while (std::next_permutation(in_a.begin(), in_a.end()));
    return static_cast<double>(extreme) / static_cast<double>(total);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    require_pairs(x, y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedValueError("correlation of a constant input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    require_pairs(x, y);
    return pearson(average_ranks(x), average_ranks(y));
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    require_pairs(x, y);
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return x[i] != x[j] ? x[i] < x[j] : y[i] < y[j];
    });

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const std::uint64_t ties_x = tied_pairs(n, [&](std::size_t i, std::size_t j) { return x[order[i]] == x[order[j]]; });
    const std::uint64_t ties_xy = tied_pairs(n, [&](std::size_t i, std::size_t j) {
        return x[order[i]] == x[order[j]] && y[order[i]] == y[order[j]];
    });
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
    const std::uint64_t swaps = count_swaps(ys);
    const std::uint64_t ties_y = tied_pairs(n, [&](std::size_t i, std::size_t j) { return ys[i] == ys[j]; });

    if (ties_x == n0 || ties_y == n0) throw UndefinedValueError("correlation of a constant input");
    const double numerator = static_cast<double>(n0) - static_cast<double>(ties_x) - static_cast<double>(ties_y) +
                             static_cast<double>(ties_xy) - 2.0 * static_cast<double>(swaps);
    const double denominator =
        std::sqrt(static_cast<double>(n0 - ties_x)) * std::sqrt(static_cast<double>(n0 - ties_y));
    return std::clamp(numerator / denominator, -1.0, 1.0);
}

Correlations correlations(std::span<const double> x, std::span<const double> y) {
    require_pairs(x, y);
    Correlations c;
    auto attempt = [&](auto fn) -> std::optional<double> {
        try {
            return fn(x, y);
        } catch (const UndefinedValueError&) {
            return std::nullopt;
        }
    };
    c.pearson = attempt(pearson);
    c.spearman = attempt(spearman);
    c.kendall_tau = attempt(kendall_tau);
    return c;
}

void BucketStats::add(double value) {
    ++n;
    const double delta = value - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (value - mean);
}

void BucketStats::merge(const BucketStats& other) {
    if (other.n == 0) return;
    if (n == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(other.n);
    const double delta = other.mean - mean;
    const double total = na + nb;
    mean += delta * nb / total;
    m2 += other.m2 + delta * delta * na * nb / total;
    n += other.n;
}

double BucketStats::sd() const {
    return n < 2 ? 0.0 : std::sqrt(std::max(0.0, m2 / static_cast<double>(n)));
}

std::string_view to_string(BucketKind kind) {
    switch (kind) {
        case BucketKind::HourOfDay: return "hour";
        case BucketKind::DayOfWeek: return "weekday";
        case BucketKind::DayOfMonth: return "day-of-month";
        case BucketKind::MonthOfYear: return "month";
    }
    return "hour";
}

BucketKind bucket_kind_from_string(std::string_view name) {
    for (auto k : {BucketKind::HourOfDay, BucketKind::DayOfWeek, BucketKind::DayOfMonth, BucketKind::MonthOfYear}) {
        if (to_string(k) == name) return k;
    }
    throw ParameterError("unknown bucket kind '" + std::string(name) + "'");
}

std::size_t bucket_count(BucketKind kind) {
    switch (kind) {
        case BucketKind::HourOfDay: return 24;
        case BucketKind::DayOfWeek: return 7;
        case BucketKind::DayOfMonth: return 31;
        case BucketKind::MonthOfYear: return 12;
    }
    return 0;
}

std::size_t TemporalProfile::total() const {
    std::size_t t = 0;
    for (const auto& b : buckets) t += b.n;
    return t;
}

std::size_t TemporalProfile::argmax() const {
    std::size_t best = buckets.size();
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        if (buckets[i].n == 0) continue;
        if (best == buckets.size() || buckets[i].mean > buckets[best].mean) best = i;
    }
    if (best == buckets.size()) throw InsufficientDataError("profile has no populated bucket");
    return best;
}

TemporalProfile temporal_aggregate(const Corpus& corpus, BucketKind kind) {
    TemporalProfile profile;
    profile.kind = kind;
    profile.buckets.assign(bucket_count(kind), {});
    for (const auto& s : corpus.series) {
        std::size_t day_bucket = 0;
        switch (kind) {
            case BucketKind::HourOfDay: break;
            case BucketKind::DayOfWeek: day_bucket = weekday_of(s.date); break;
            case BucketKind::DayOfMonth: day_bucket = day_of_month(s.date) - 1; break;
            case BucketKind::MonthOfYear: day_bucket = month_of(s.date) - 1; break;
        }
        BucketStats day;
        for (std::size_t i = 0; i < s.slots.size(); ++i) {
            if (kind == BucketKind::HourOfDay) {
                const auto hour = i * static_cast<std::size_t>(s.slot_minutes) / 60;
                profile.buckets[hour].add(s.slots[i]);
            } else {
                day.add(s.slots[i]);
            }
        }
        if (kind != BucketKind::HourOfDay) profile.buckets[day_bucket].merge(day);
    }
    return profile;
}

void write_profile_csv(std::ostream& out, const TemporalProfile& profile) {
    const std::size_t base =
        (profile.kind == BucketKind::DayOfMonth || profile.kind == BucketKind::MonthOfYear) ? 1 : 0;
    out << "bucket,mean,std,n\n";
    for (std::size_t i = 0; i < profile.buckets.size(); ++i) {
        const auto& b = profile.buckets[i];
        out << i + base << ',';
        if (b.n > 0) out << format_number(b.mean) << ',' << format_number(b.sd());
        else out << ',';
        out << ',' << b.n << '\n';
    }
}

GatedComparison gated_comparison(std::span<const double> a, std::span<const double> b, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");
    GatedComparison g;
    g.ks = ks_test(a, b);
    g.alpha = alpha;
    g.mean_a = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    g.mean_b = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    g.significant = g.ks.p_value < alpha;
    if (g.significant) g.mean_difference = g.mean_b - g.mean_a;
    return g;
}

nlohmann::json to_json(const KsResult& ks) {
    return {{"d_statistic", ks.d_statistic}, {"p_value", ks.p_value}, {"n1", ks.n1}, {"n2", ks.n2}};
}

nlohmann::json to_json(const GatedComparison& g) {
    nlohmann::json j;
    j["ks"] = to_json(g.ks);
    j["alpha"] = g.alpha;
    j["significant"] = g.significant;
    if (g.mean_difference) {
        j["mean_a"] = g.mean_a;
        j["mean_b"] = g.mean_b;
        j["mean_difference"] = *g.mean_difference;
    } else {
        j["effect"] = "suppressed";
    }
    return j;
}

nlohmann::json to_json(const Correlations& c) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"pearson", opt(c.pearson)}, {"spearman", opt(c.spearman)}, {"kendall_tau", opt(c.kendall_tau)}};
}

double HeartRateBands::within_fraction() const {
    const std::size_t n = below + within + above;
    return n == 0 ? 0.0 : static_cast<double>(within) / static_cast<double>(n);
}

HeartRateBands heart_rate_bands(std::span<const double> bpm, double low, double high) {
    if (!(low < high)) throw ParameterError("heart-rate band needs low < high");
    HeartRateBands bands;
    bands.low = low;
    bands.high = high;
    for (double v : bpm) {
        if (v < low) ++bands.below;
        else if (v > high) ++bands.above;
        else ++bands.within;
    }
    return bands;
}

nlohmann::json to_json(const HeartRateBands& b) {
    return {{"low", b.low},       {"high", b.high},   {"below", b.below},
            {"within", b.within}, {"above", b.above}, {"within_fraction", b.within_fraction()}};
}

}  // namespace wearable
