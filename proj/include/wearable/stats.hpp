#pragma once

#include "wearable/timeseries.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

namespace wearable {

struct KsResult {
    double d_statistic = 0.0;
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

/// Two-sample Kolmogorov-Smirnov test. The p-value is the asymptotic
/// Kolmogorov tail at sqrt(n1 n2 / (n1 + n2)) * D.
KsResult ks_test(std::span<const double> a, std::span<const double> b);

/// sup |ECDF_a - ECDF_b| over the pooled sample.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

/// Exact permutation p-value: share of all C(n1+n2, n1) relabelings of the
/// pooled sample with D >= the observed D. Limited to n1 + n2 <= 20.
double ks_permutation_p(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kMaxPermutationSize = 20;

/// Each coefficient throws UndefinedValueError on a constant input.
/// Lengths must match (DimensionError) and be >= 3 (InsufficientDataError).
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
/// Tie-corrected tau-b, O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Average ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

struct Correlations {
    std::optional<double> pearson;
    std::optional<double> spearman;
    std::optional<double> kendall_tau;
};

/// An undefined coefficient is left empty; the others are still computed.
Correlations correlations(std::span<const double> x, std::span<const double> y);

/// Mergeable running mean / variance.
struct BucketStats {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double value);
    void merge(const BucketStats& other);
    /// Population standard deviation; 0 for n < 2.
    double sd() const;
};

enum class BucketKind { HourOfDay, DayOfWeek, DayOfMonth, MonthOfYear };

std::string_view to_string(BucketKind kind);
BucketKind bucket_kind_from_string(std::string_view name);
/// 24, 7, 31, 12.
std::size_t bucket_count(BucketKind kind);

struct TemporalProfile {
    BucketKind kind = BucketKind::HourOfDay;
    /// Index: hour 0..23; weekday 0 = Sunday; day of month - 1; month - 1.
    std::vector<BucketStats> buckets;

    std::size_t total() const;
    /// Lowest-index bucket with the largest mean among populated buckets.
    std::size_t argmax() const;
};

/// Per-bucket statistics of every slot value, placed by slot start time and
/// the series' local date. Values are aggregated as stored.
TemporalProfile temporal_aggregate(const Corpus& corpus, BucketKind kind);

/// `bucket,mean,std,n` rows; day-of-month and month buckets are 1-based.
void write_profile_csv(std::ostream& out, const TemporalProfile& profile);

struct GatedComparison {
    KsResult ks;
    double alpha = 0.05;
    bool significant = false;
    double mean_a = 0.0;
    double mean_b = 0.0;
    std::optional<double> mean_difference;  // mean_b - mean_a, only when significant
};

/// KS gate at `alpha` in [0, 1]; significant iff p < alpha.
GatedComparison gated_comparison(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

nlohmann::json to_json(const KsResult& ks);
nlohmann::json to_json(const GatedComparison& comparison);
nlohmann::json to_json(const Correlations& c);

struct HeartRateBands {
    double low = 60.0;
    double high = 100.0;
    std::size_t below = 0;
    std::size_t within = 0;  // [low, high]
    std::size_t above = 0;

    double within_fraction() const;
};

HeartRateBands heart_rate_bands(std::span<const double> bpm, double low = 60.0, double high = 100.0);

nlohmann::json to_json(const HeartRateBands& bands);

}  // namespace wearable
