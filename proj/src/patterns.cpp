#include "wearable/patterns.hpp"

#include "wearable/corpus_io.hpp"
#include "wearable/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wearable {

namespace {

constexpr double kPositionSlack = 1e-12;

/// Rescales to [0, 1]; returns false when the curve is flat.
bool rescale_unit(std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double min = *lo, max = *hi;
    const double range = max - min;
    if (!(range > 1e-9 * std::max({1.0, std::abs(min), std::abs(max)}))) return false;
    for (double& x : v) x = (x - min) / range;
    return true;
}

double position(std::size_t i, std::size_t n) {
    return n < 2 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
}

void require_window(const SeriesFragment& w, int start, int end, double min_coverage) {
    if (w.start_hour != start || w.end_hour != end) {
        throw ParameterError("expected a " + std::to_string(start) + ":00-" + std::to_string(end) + ":00 window");
    }
    if (w.coverage < min_coverage) {
        throw InsufficientDataError("window coverage " + format_number(w.coverage) + " below " +
                                    format_number(min_coverage));
    }
}

}  // namespace

std::string_view to_string(PatternLabel label) {
    switch (label) {
        case PatternLabel::Valley: return "valley";
        case PatternLabel::Downward: return "downward";
        case PatternLabel::Peak: return "peak";
        case PatternLabel::Upward: return "upward";
        case PatternLabel::Unclassified: return "unclassified";
    }
    return "unclassified";
}

PatternLabel pattern_from_string(std::string_view name) {
    for (auto p : kAllPatterns) {
        if (to_string(p) == name) return p;
    }
    throw ParameterError("unknown pattern '" + std::string(name) + "'");
}

std::vector<double> moving_average(std::span<const double> values, int radius) {
    if (radius < 0) throw ParameterError("smoothing radius must be >= 0");
    const auto n = static_cast<long>(values.size());
    std::vector<double> out(values.size());
    for (long i = 0; i < n; ++i) {
        const long lo = std::max(0L, i - radius), hi = std::min(n - 1, i + radius);
        double s = 0.0;
        for (long j = lo; j <= hi; ++j) s += values[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = s / static_cast<double>(hi - lo + 1);
    }
    return out;
}

double least_squares_slope(std::span<const double> values, double step) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const double x_mean = step * static_cast<double>(n - 1) / 2.0;
    const double y_mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = step * static_cast<double>(i) - x_mean;
        sxy += dx * (values[i] - y_mean);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

PatternLabel classify_sleep_values(std::span<const double> values, int slot_minutes,
                                   const SleepClassifierParams& params) {
    if (params.position_band < 0.0 || params.position_band > 0.5) throw ParameterError("position band must lie in [0, 0.5]");
    if (params.slope_tol < 0.0) throw ParameterError("slope tolerance must be >= 0");
    if (slot_minutes <= 0) throw ParameterError("slot_minutes must be positive");
    if (values.size() < 3) return PatternLabel::Unclassified;

    auto v = moving_average(values, params.smoothing_radius);
    if (!rescale_unit(v)) return PatternLabel::Unclassified;

    const std::size_t n = v.size();
    const auto min_it = std::min_element(v.begin(), v.end());
    const auto max_it = std::max_element(v.begin(), v.end());
    const double min_pos = position(static_cast<std::size_t>(min_it - v.begin()), n);
    const double max_pos = position(static_cast<std::size_t>(max_it - v.begin()), n);
    const double band = params.position_band;
    const double tol = params.slope_tol;
    auto central = [&](double p) { return p >= band - kPositionSlack && p <= 1.0 - band + kPositionSlack; };

    if (central(min_pos) && v.front() - *min_it >= tol && v.back() - *min_it >= tol) return PatternLabel::Valley;
    if (central(max_pos) && *max_it - v.front() >= tol && *max_it - v.back() >= tol) return PatternLabel::Peak;
    const double slope = least_squares_slope(v, static_cast<double>(slot_minutes) / 60.0);
    if (slope <= -tol && min_pos >= 1.0 - band - kPositionSlack) return PatternLabel::Downward;
    return PatternLabel::Unclassified;
}

PatternLabel classify_sleep_pattern(const SeriesFragment& window, const SleepClassifierParams& params) {
    require_window(window, kSleepStartHour, kSleepEndHour, params.min_coverage);
    return classify_sleep_values(window.values, window.slot_minutes, params);
}

PatternLabel classify_day_values(std::span<const double> values, int slot_minutes, const DayTrendParams& params) {
    if (params.slope_tol < 0.0) throw ParameterError("slope tolerance must be >= 0");
    if (slot_minutes <= 0) throw ParameterError("slot_minutes must be positive");
    std::vector<double> v(values.begin(), values.end());
    if (v.size() < 2 || !rescale_unit(v)) return PatternLabel::Unclassified;
    const double slope = least_squares_slope(v, static_cast<double>(slot_minutes) / 60.0);
    if (slope >= params.slope_tol && slope > 0.0) return PatternLabel::Upward;
    if (slope <= -params.slope_tol && slope < 0.0) return PatternLabel::Downward;
    return PatternLabel::Unclassified;
}

PatternLabel classify_day_trend(const SeriesFragment& window, const DayTrendParams& params) {
    require_window(window, kDayStartHour, kDayEndHour, params.min_coverage);
    return classify_day_values(window.values, window.slot_minutes, params);
}

PatternLabel user_majority_pattern(std::span<const PatternLabel> labels) {
    if (labels.empty()) throw ParameterError("majority vote over no labels");
    std::map<PatternLabel, std::size_t> counts;
    for (auto l : labels) ++counts[l];
    PatternLabel best = labels.front();
    std::size_t best_count = 0;
    for (auto p : kAllPatterns) {
        auto it = counts.find(p);
        if (it != counts.end() && it->second > best_count) {
            best = p;
            best_count = it->second;
        }
    }
    return best;
}

Season season_of(LocalDate date) {
    switch (month_of(date)) {
        case 12: case 1: case 2: return Season::Winter;
        case 3: case 4: case 5: return Season::Spring;
        case 6: case 7: case 8: return Season::Summer;
        default: return Season::Fall;
    }
}

std::string_view to_string(Season season) {
    switch (season) {
        case Season::Winter: return "winter";
        case Season::Spring: return "spring";
        case Season::Summer: return "summer";
        case Season::Fall: return "fall";
    }
    return "winter";
}

bool Cohort::contains(LocalDate date) const {
    switch (kind) {
        case Kind::All: return true;
        case Kind::Season: return season_of(date) == season;
        case Kind::Weekday: return weekday_of(date) != 0;
        case Kind::Weekend: return weekday_of(date) == 0;
    }
    return false;
}

std::string Cohort::name() const {
    switch (kind) {
        case Kind::All: return "all";
        case Kind::Season: return std::string(to_string(season));
        case Kind::Weekday: return "weekday";
        case Kind::Weekend: return "weekend";
    }
    return "all";
}

PatternDistribution pattern_distribution(std::span<const DayPattern> days, const Cohort& cohort) {
    std::map<std::string, std::vector<PatternLabel>> per_user;
    for (const auto& d : days) {
        if (cohort.contains(d.date)) per_user[d.user_id].push_back(d.label);
    }
    if (per_user.empty()) throw EmptyCohortError("no days in cohort '" + cohort.name() + "'");
    std::map<std::string, PatternLabel> users;
    for (const auto& [user, labels] : per_user) users[user] = user_majority_pattern(labels);
    auto dist = pattern_distribution(users);
    dist.cohort = cohort;
    return dist;
}

PatternDistribution pattern_distribution(const std::map<std::string, PatternLabel>& users) {
    if (users.empty()) throw EmptyCohortError("no users in cohort");
    PatternDistribution dist;
    for (auto p : kAllPatterns) dist.counts[p] = 0;
    for (const auto& [user, label] : users) ++dist.counts[label];
    dist.n_users = users.size();
    for (const auto& [label, count] : dist.counts) {
        dist.fractions[label] = static_cast<double>(count) / static_cast<double>(dist.n_users);
    }
    return dist;
}

std::map<std::pair<PatternLabel, PatternLabel>, std::size_t> pattern_crosstab(std::span<const DayPattern> sleep,
                                                                               std::span<const DayPattern> day) {
    std::map<DayKey, PatternLabel> day_labels;
    for (const auto& d : day) day_labels[DayKey{d.user_id, d.date}] = d.label;
    std::map<std::pair<PatternLabel, PatternLabel>, std::size_t> table;
    for (const auto& s : sleep) {
        auto it = day_labels.find(DayKey{s.user_id, s.date});
        if (it != day_labels.end()) ++table[{s.label, it->second}];
    }
    return table;
}

void write_distribution_csv(std::ostream& out, std::span<const PatternDistribution> distributions) {
    out << "cohort,label,fraction,n\n";
    for (const auto& d : distributions) {
        for (auto p : kAllPatterns) {
            out << d.cohort.name() << ',' << to_string(p) << ',' << format_number(d.fractions.at(p)) << ','
                << d.counts.at(p) << '\n';
        }
    }
}

}  // namespace wearable
