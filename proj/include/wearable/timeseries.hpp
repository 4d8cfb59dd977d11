#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wearable {

using Matrix = std::vector<std::vector<double>>;

enum class SensorKind { HeartRate, Steps };

std::string_view to_string(SensorKind kind);
/// Accepts the record spellings "hr" and "steps".
SensorKind sensor_kind_from_string(std::string_view token);

/// One timestamped sensor reading.
struct Sample {
    std::string user_id;
    std::int64_t timestamp_ms = 0;  // epoch milliseconds, UTC
    SensorKind kind = SensorKind::HeartRate;
    double value = 0.0;

    bool operator==(const Sample&) const = default;
};

enum class InputFormat { Csv, Jsonl };

/// Parses `user_id,timestamp_ms,kind,value` rows (an optional header line is
/// skipped) or JSON lines with the same keys. Blank lines are ignored. Record
/// order is preserved. Throws ParseError / RejectedRecordError.
std::vector<Sample> parse_samples(std::istream& input, InputFormat format);

/// A calendar date in the user's local clock.
using LocalDate = std::chrono::sys_days;

std::string format_date(LocalDate date);
LocalDate parse_date(std::string_view text);
unsigned month_of(LocalDate date);        // 1..12
unsigned day_of_month(LocalDate date);    // 1..31
unsigned weekday_of(LocalDate date);      // 0 = Sunday .. 6 = Saturday

inline constexpr int kMinutesPerDay = 1440;
inline constexpr std::int64_t kMsPerMinute = 60'000;
inline constexpr std::int64_t kMsPerDay = kMinutesPerDay * kMsPerMinute;

/// Fixed UTC offset per user; users without an entry use the default.
struct DayPolicy {
    std::map<std::string, int> utc_offset_minutes;
    int default_offset_minutes = 0;

    int offset_for(const std::string& user_id) const;
};

void validate_utc_offset(int minutes);

LocalDate local_date_of(std::int64_t timestamp_ms, int utc_offset_minutes);
/// Milliseconds since local midnight.
std::int64_t local_time_of_day_ms(std::int64_t timestamp_ms, int utc_offset_minutes);

struct DayKey {
    std::string user_id;
    LocalDate date;

    auto operator<=>(const DayKey&) const = default;
};

using DayBuckets = std::map<DayKey, std::vector<Sample>>;

/// Groups samples by (user, local date). Each bucket is sorted by timestamp
/// (stable, so equal timestamps keep input order).
DayBuckets slice_days(std::span<const Sample> samples, const DayPolicy& policy);

enum class SlotAggregation { Mean, Sum };

/// One user-day on a fixed grid of 1440 / slot_minutes slots starting at 00:00.
struct FixedSeries {
    std::string user_id;
    LocalDate date{};
    int slot_minutes = 30;
    std::vector<double> slots;
    double coverage = 0.0;  // fraction of slots backed by at least one raw sample
    bool normalized = false;
    std::vector<bool> observed;  // per slot, set by resample; empty when unknown

    std::size_t length() const noexcept { return slots.size(); }
};

void validate_slot_minutes(int slot_minutes);
std::size_t slots_per_day(int slot_minutes);

/// Bins one user-day onto the slot grid. Interior gaps are linearly
/// interpolated, leading/trailing gaps take the nearest filled value.
/// Throws EmptyDayError when no sample falls in the day.
FixedSeries resample(std::span<const Sample> day_samples, int slot_minutes,
                     int utc_offset_minutes = 0,
                     SlotAggregation aggregation = SlotAggregation::Mean);

inline constexpr double kHeartRateFloor = 31.0;
inline constexpr double kHeartRateCeiling = 245.0;

/// Affine map of [lo, hi] onto [0, 1], clamping out-of-range values.
FixedSeries normalize(const FixedSeries& series, double lo = kHeartRateFloor,
                      double hi = kHeartRateCeiling);
/// Inverse affine map (no clamping).
FixedSeries denormalize(const FixedSeries& series, double lo = kHeartRateFloor,
                        double hi = kHeartRateCeiling);

/// A contiguous hour-aligned part of a FixedSeries.
struct SeriesFragment {
    std::string user_id;
    LocalDate date{};
    int slot_minutes = 30;
    int start_hour = 0;
    int end_hour = 24;
    std::vector<double> values;
    double coverage = 0.0;
    bool normalized = false;
};

/// Slots covering [start_hour, end_hour). Coverage is the window's own
/// observed share when the series carries its mask, else the day's coverage.
/// Throws AlignmentError when either boundary does not fall on a slot boundary.
SeriesFragment window_slice(const FixedSeries& series, int start_hour, int end_hour);

struct NightShiftPolicy {
    double threshold_steps = 500.0;
    double day_fraction = 0.5;
    int window_start_hour = 0;
    int window_end_hour = 8;
};

struct NightShiftResult {
    std::vector<std::string> retained;     // includes `unevaluated`
    std::vector<std::string> excluded;
    std::vector<std::string> unevaluated;  // no activity data; retained with a warning
};

/// Excludes users whose night-window step total exceeds the threshold on at
/// least `day_fraction` of their recorded days.
NightShiftResult night_shift_filter(std::span<const std::string> users,
                                    std::span<const FixedSeries> activity_days,
                                    const NightShiftPolicy& policy = {});

/// Daily series of a single sensor kind sharing one grid.
struct Corpus {
    SensorKind kind = SensorKind::HeartRate;
    std::vector<FixedSeries> series;
    std::map<std::string, std::string> region;  // optional user metadata

    /// Throws DimensionError when series disagree on grid or normalization.
    void validate() const;
    std::size_t length() const;
    std::vector<std::string> users() const;
    Matrix matrix() const;
};

struct CorpusBuildOptions {
    int slot_minutes = 30;
    double min_coverage = 0.5;
    DayPolicy days;
};

struct CorpusBuild {
    Corpus corpus;
    std::size_t dropped_days = 0;  // below min_coverage
};

/// slice_days + resample for every user-day of one sensor kind. Heart rate is
/// averaged per slot, steps are summed.
CorpusBuild build_corpus(std::span<const Sample> samples, SensorKind kind,
                         const CorpusBuildOptions& options = {});

Corpus normalize(const Corpus& corpus, double lo = kHeartRateFloor,
                 double hi = kHeartRateCeiling);

}  // namespace wearable
