#pragma once

#include "wearable/patterns.hpp"
#include "wearable/timeseries.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace wearable {

struct CorpusSpec {
    int n_users = 100;
    int days_per_user = 14;
    std::map<PatternLabel, double> pattern_mix = {{PatternLabel::Valley, 0.44},
                                                  {PatternLabel::Downward, 0.295},
                                                  {PatternLabel::Peak, 0.263},
                                                  {PatternLabel::Unclassified, 0.002}};
    double noise_sigma = 0.02;  // normalized units
    int cadence_minutes = 30;   // 10, 30 or 60
    int activity_peak_hour = 18;
    double weekend_activity_scale = 0.8;
    std::uint64_t seed = 0;

    double user_offset = 0.05;          // per-user shift drawn from U(-user_offset, user_offset)
    double activity_peak_rate = 1200.0;  // steps per hour at the peak
    LocalDate start_date = parse_date("2019-01-01");

    /// Throws ParameterError.
    void validate() const;
};

/// Normalized heart-rate template for a whole day on the cadence grid:
/// the sleep pattern over 00:00-08:00, then the associated daytime trend.
std::vector<double> day_template(PatternLabel sleep_pattern, int cadence_minutes);

/// Valley and Peak -> Downward, Downward -> Upward, Unclassified -> Unclassified.
PatternLabel planted_day_trend(PatternLabel sleep_pattern);

/// Steps per slot for one day before noise.
std::vector<double> activity_template(const CorpusSpec& spec, LocalDate date);

struct SyntheticUser {
    std::string user_id;
    PatternLabel pattern = PatternLabel::Unclassified;
    std::vector<FixedSeries> heart_rate;  // raw bpm
    std::vector<FixedSeries> steps;
};

/// Deterministic in (spec.seed, user_index, day).
SyntheticUser gen_user(PatternLabel pattern, const CorpusSpec& spec, int user_index);

/// Hamilton apportionment; remainder ties go to the lower index.
std::vector<std::size_t> largest_remainder(std::span<const double> fractions, std::size_t total);

/// Users per pattern, in PatternLabel order.
std::map<PatternLabel, std::size_t> planted_counts(const CorpusSpec& spec);

struct SyntheticCorpus {
    Corpus heart_rate;  // raw bpm, full coverage
    Corpus steps;
    std::map<std::string, PatternLabel> planted;

    /// Planted pattern of every heart-rate series, in corpus order.
    std::vector<PatternLabel> series_patterns() const;
};

SyntheticCorpus gen_corpus(const CorpusSpec& spec);

std::string synthetic_user_id(int user_index, int n_users);

/// `user_id,planted_pattern,planted_day_trend`.
void write_labels_csv(std::ostream& out, const std::map<std::string, PatternLabel>& planted);
/// Reads `user_id,planted_pattern[,...]`; extra columns are ignored.
std::map<std::string, PatternLabel> read_labels_csv(std::istream& in);

}  // namespace wearable
