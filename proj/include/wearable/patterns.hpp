#pragma once

#include "wearable/timeseries.hpp"

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wearable {

/// Declaration order is the tie-break precedence for majority votes.
enum class PatternLabel { Valley, Downward, Peak, Upward, Unclassified };

inline constexpr PatternLabel kAllPatterns[] = {PatternLabel::Valley, PatternLabel::Downward, PatternLabel::Peak,
                                                PatternLabel::Upward, PatternLabel::Unclassified};

std::string_view to_string(PatternLabel label);
PatternLabel pattern_from_string(std::string_view name);

inline constexpr int kSleepStartHour = 0;
inline constexpr int kSleepEndHour = 8;
inline constexpr int kDayStartHour = 6;
inline constexpr int kDayEndHour = 24;

struct SleepClassifierParams {
    int smoothing_radius = 1;     // moving-average half width, in slots
    double slope_tol = 0.02;      // after rescaling the window to [0, 1]
    double position_band = 0.25;  // central band is [band, 1 - band] of the window
    double min_coverage = 0.5;
};

struct DayTrendParams {
    double slope_tol = 0.02;
    double min_coverage = 0.5;
};

/// Centred moving average; windows are truncated at the ends.
std::vector<double> moving_average(std::span<const double> values, int radius);

/// Ordinary least-squares slope of `values` sampled every `step` x-units.
double least_squares_slope(std::span<const double> values, double step);

/// Sleep-window shape of raw values sampled every `slot_minutes`.
///
/// The curve is smoothed and rescaled to [0, 1]; a flat curve is
/// Unclassified. Rules, first match wins:
///  - Valley: minimum inside the central band, both ends >= min + tol.
///  - Peak: maximum inside the central band, both ends <= max - tol.
///  - Downward: slope <= -tol per hour and the minimum in the final band.
/// A hump that decays satisfies both Peak and Downward slope tests; the
/// extremum rule is checked first.
PatternLabel classify_sleep_values(std::span<const double> values, int slot_minutes,
                                   const SleepClassifierParams& params = {});

/// Requires a 00:00-08:00 fragment; throws InsufficientDataError below min_coverage.
PatternLabel classify_sleep_pattern(const SeriesFragment& window, const SleepClassifierParams& params = {});

/// Upward / Downward by rescaled least-squares slope, else Unclassified.
PatternLabel classify_day_values(std::span<const double> values, int slot_minutes, const DayTrendParams& params = {});

/// Requires a 06:00-24:00 fragment; throws InsufficientDataError below min_coverage.
PatternLabel classify_day_trend(const SeriesFragment& window, const DayTrendParams& params = {});

/// Modal label; ties resolved by PatternLabel declaration order.
PatternLabel user_majority_pattern(std::span<const PatternLabel> labels);

enum class Season { Winter, Spring, Summer, Fall };

/// Northern-hemisphere meteorological seasons.
Season season_of(LocalDate date);
std::string_view to_string(Season season);

struct Cohort {
    enum class Kind { All, Season, Weekday, Weekend };

    Kind kind = Kind::All;
    Season season = Season::Winter;

    static Cohort all() { return {}; }
    static Cohort of_season(Season s) { return {Kind::Season, s}; }
    static Cohort weekday() { return {Kind::Weekday, Season::Winter}; }
    /// Sunday only.
    static Cohort weekend() { return {Kind::Weekend, Season::Winter}; }

    bool contains(LocalDate date) const;
    std::string name() const;
};

struct DayPattern {
    std::string user_id;
    LocalDate date{};
    PatternLabel label = PatternLabel::Unclassified;
};

struct PatternDistribution {
    Cohort cohort;
    std::map<PatternLabel, double> fractions;  // every label present, sums to 1
    std::map<PatternLabel, std::size_t> counts;
    std::size_t n_users = 0;
};

/// Per-user majority over the cohort's days, then the label histogram over users.
/// Throws EmptyCohortError if no day falls in the cohort.
PatternDistribution pattern_distribution(std::span<const DayPattern> days, const Cohort& cohort = Cohort::all());
PatternDistribution pattern_distribution(const std::map<std::string, PatternLabel>& users);

/// Counts of (sleep label, day label) over user-days present in both lists.
std::map<std::pair<PatternLabel, PatternLabel>, std::size_t> pattern_crosstab(std::span<const DayPattern> sleep,
                                                                               std::span<const DayPattern> day);

/// `cohort,label,fraction,n` rows.
void write_distribution_csv(std::ostream& out, std::span<const PatternDistribution> distributions);

}  // namespace wearable
