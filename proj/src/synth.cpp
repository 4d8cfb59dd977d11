#include "wearable/synth.hpp"

#include "clustering_internal.hpp"
#include "wearable/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace wearable {

namespace {

constexpr double kLow = 0.25;
constexpr double kHigh = 0.75;
constexpr double kAwakeHour = 7.0;

double slot_hour(std::size_t i, int cadence) {
    return static_cast<double>(i) * static_cast<double>(cadence) / 60.0;
}

/// Unit-range sleep shape at hour t in [0, 8).
double sleep_unit(PatternLabel pattern, double t) {
    switch (pattern) {
        case PatternLabel::Valley: {
            const double hann = 0.5 * (1.0 + std::cos(std::numbers::pi * (t - 4.0) / 4.0));
            return 1.0 - hann;
        }
        case PatternLabel::Downward:
            return 1.0 - t / 8.0;
        case PatternLabel::Peak: {
            if (t <= 2.5) {
                const double s = std::sin(std::numbers::pi * t / 5.0);
                return 0.4 + 0.6 * s * s;
            }
            return 1.0 - (t - 2.5) / 5.5;
        }
        case PatternLabel::Unclassified:
            return 0.5;
        case PatternLabel::Upward:
            break;
    }
    throw ParameterError("upward is not a sleep pattern");
}

void require_sleep_pattern(PatternLabel p) {
    if (p == PatternLabel::Upward) throw ParameterError("upward is not a sleep pattern");
}

/// Shortest circular distance between hours on a 24 h clock.
double clock_distance(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 24.0);
    return std::min(d, 24.0 - d);
}

}  // namespace

void CorpusSpec::validate() const {
    if (n_users < 1) throw ParameterError("n_users must be >= 1");
    if (days_per_user < 1) throw ParameterError("days_per_user must be >= 1");
    if (cadence_minutes != 10 && cadence_minutes != 30 && cadence_minutes != 60) {
        throw ParameterError("cadence_minutes must be 10, 30 or 60");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ParameterError("noise_sigma must be >= 0");
    if (activity_peak_hour < 0 || activity_peak_hour > 23) throw ParameterError("activity_peak_hour must lie in [0, 23]");
    if (!(weekend_activity_scale > 0.0 && weekend_activity_scale <= 1.0)) {
        throw ParameterError("weekend_activity_scale must lie in (0, 1]");
    }
    if (!(user_offset >= 0.0 && user_offset < kLow)) throw ParameterError("user_offset must lie in [0, 0.25)");
    if (!(activity_peak_rate >= 0.0) || !std::isfinite(activity_peak_rate)) {
        throw ParameterError("activity_peak_rate must be >= 0");
    }
    double sum = 0.0;
    for (const auto& [label, f] : pattern_mix) {
        require_sleep_pattern(label);
        if (!(f >= 0.0)) throw ParameterError("pattern fractions must be >= 0");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("pattern_mix must sum to 1");
}

std::vector<double> day_template(PatternLabel sleep_pattern, int cadence_minutes) {
    require_sleep_pattern(sleep_pattern);
    validate_slot_minutes(cadence_minutes);
    const std::size_t n = slots_per_day(cadence_minutes);
    const std::size_t sleep_slots = static_cast<std::size_t>(kSleepEndHour * 60 / cadence_minutes);
    const PatternLabel trend = planted_day_trend(sleep_pattern);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = slot_hour(i, cadence_minutes);
        if (i < sleep_slots) {
            v[i] = kLow + (kHigh - kLow) * sleep_unit(sleep_pattern, t);
            continue;
        }
        const double u = static_cast<double>(i - sleep_slots) / static_cast<double>(n - sleep_slots - 1);
        switch (trend) {
            case PatternLabel::Upward: v[i] = kLow + (kHigh - kLow) * u; break;
            case PatternLabel::Downward: v[i] = kHigh - (kHigh - kLow) * u; break;
            default: v[i] = 0.5; break;
        }
    }
    return v;
}

PatternLabel planted_day_trend(PatternLabel sleep_pattern) {
    switch (sleep_pattern) {
        case PatternLabel::Valley:
        case PatternLabel::Peak: return PatternLabel::Downward;
        case PatternLabel::Downward: return PatternLabel::Upward;
        case PatternLabel::Unclassified: return PatternLabel::Unclassified;
        case PatternLabel::Upward: break;
    }
    throw ParameterError("upward is not a sleep pattern");
}

std::vector<double> activity_template(const CorpusSpec& spec, LocalDate date) {
    const std::size_t n = slots_per_day(spec.cadence_minutes);
    const double per_slot = spec.activity_peak_rate * static_cast<double>(spec.cadence_minutes) / 60.0;
    const double scale = weekday_of(date) == 0 ? spec.weekend_activity_scale : 1.0;
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = slot_hour(i, spec.cadence_minutes);
        if (t < kAwakeHour) continue;
        const double d = clock_distance(t, spec.activity_peak_hour);
        v[i] = scale * per_slot * (0.1 + 0.9 * std::exp(-d * d / 18.0));
    }
    return v;
}

SyntheticUser gen_user(PatternLabel pattern, const CorpusSpec& spec, int user_index) {
    spec.validate();
    require_sleep_pattern(pattern);
    if (user_index < 0) throw ParameterError("user_index must be >= 0");

    SyntheticUser user;
    user.user_id = synthetic_user_id(user_index, spec.n_users);
    user.pattern = pattern;
    const auto base = day_template(pattern, spec.cadence_minutes);
    const auto uid = static_cast<std::uint64_t>(user_index);

    auto user_rng = detail::make_rng(spec.seed, uid << 20);
    const double offset = spec.user_offset > 0.0
                              ? std::uniform_real_distribution<double>(-spec.user_offset, spec.user_offset)(user_rng)
                              : 0.0;

    for (int day = 0; day < spec.days_per_user; ++day) {
        const LocalDate date = spec.start_date + std::chrono::days{day};
        auto rng = detail::make_rng(spec.seed, (uid << 20) | (static_cast<std::uint64_t>(day) + 1));
        std::normal_distribution<double> noise(0.0, 1.0);

        FixedSeries hr{user.user_id, date, spec.cadence_minutes, {}, 1.0, false, {}};
        hr.slots.resize(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            const double z = spec.noise_sigma > 0.0 ? noise(rng) : 0.0;
            const double v = std::clamp(base[i] + offset + spec.noise_sigma * z, 0.0, 1.0);
            hr.slots[i] = kHeartRateFloor + (kHeartRateCeiling - kHeartRateFloor) * v;
        }

        FixedSeries st{user.user_id, date, spec.cadence_minutes, activity_template(spec, date), 1.0, false, {}};
        for (double& s : st.slots) {
            const double z = spec.noise_sigma > 0.0 ? noise(rng) : 0.0;
            s = std::max(0.0, s * (1.0 + spec.noise_sigma * z));
        }
        user.heart_rate.push_back(std::move(hr));
        user.steps.push_back(std::move(st));
    }
    return user;
}

std::vector<std::size_t> largest_remainder(std::span<const double> fractions, std::size_t total) {
    std::vector<std::size_t> counts(fractions.size(), 0);
    std::vector<double> remainder(fractions.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        const double quota = fractions[i] * static_cast<double>(total);
        counts[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
        remainder[i] = std::max(0.0, quota - static_cast<double>(counts[i]));
        assigned += counts[i];
    }
    std::vector<std::size_t> order(fractions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return remainder[a] > remainder[b] + 1e-9;
    });
    for (std::size_t r = 0; assigned < total && r < order.size(); ++r, ++assigned) ++counts[order[r]];
    return counts;
}

std::map<PatternLabel, std::size_t> planted_counts(const CorpusSpec& spec) {
    spec.validate();
    std::vector<PatternLabel> labels;
    std::vector<double> fractions;
    for (const auto& [label, f] : spec.pattern_mix) {
        labels.push_back(label);
        fractions.push_back(f);
    }
    const auto counts = largest_remainder(fractions, static_cast<std::size_t>(spec.n_users));
    std::map<PatternLabel, std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]] = counts[i];
    return out;
}

std::vector<PatternLabel> SyntheticCorpus::series_patterns() const {
    std::vector<PatternLabel> out;
    out.reserve(heart_rate.series.size());
    for (const auto& s : heart_rate.series) out.push_back(planted.at(s.user_id));
    return out;
}

SyntheticCorpus gen_corpus(const CorpusSpec& spec) {
    const auto counts = planted_counts(spec);
    std::vector<PatternLabel> assignment;
    for (const auto& [label, count] : counts) assignment.insert(assignment.end(), count, label);
    auto rng = detail::make_rng(spec.seed, ~std::uint64_t{0});
    std::shuffle(assignment.begin(), assignment.end(), rng);

    SyntheticCorpus out;
    out.heart_rate.kind = SensorKind::HeartRate;
    out.steps.kind = SensorKind::Steps;
    for (int u = 0; u < spec.n_users; ++u) {
        auto user = gen_user(assignment[static_cast<std::size_t>(u)], spec, u);
        out.planted[user.user_id] = user.pattern;
        std::move(user.heart_rate.begin(), user.heart_rate.end(), std::back_inserter(out.heart_rate.series));
        std::move(user.steps.begin(), user.steps.end(), std::back_inserter(out.steps.series));
    }
    return out;
}

std::string synthetic_user_id(int user_index, int n_users) {
    const int width = std::max(4, static_cast<int>(std::to_string(std::max(n_users - 1, 0)).size()));
    std::string digits = std::to_string(user_index);
    if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return "u" + digits;
}

void write_labels_csv(std::ostream& out, const std::map<std::string, PatternLabel>& planted) {
    out << "user_id,planted_pattern,planted_day_trend\n";
    for (const auto& [user, label] : planted) {
        out << user << ',' << to_string(label) << ',' << to_string(planted_day_trend(label)) << '\n';
    }
}

std::map<std::string, PatternLabel> read_labels_csv(std::istream& in) {
    std::map<std::string, PatternLabel> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("user_id", 0) == 0) continue;
        std::istringstream row(line);
        std::string user, label;
        if (!std::getline(row, user, ',') || !std::getline(row, label, ',') || user.empty()) {
            throw ParseError(line_no, "expected user_id,planted_pattern");
        }
        try {
            out[user] = pattern_from_string(label);
        } catch (const ParameterError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return out;
}

}  // namespace wearable
