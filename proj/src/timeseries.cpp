#include "wearable/timeseries.hpp"

#include "wearable/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <set>

#include <json.hpp>

namespace wearable {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

Sample make_sample(std::size_t line, std::string user, std::int64_t ts, std::string_view kind,
                   double value) {
    if (user.empty()) throw ParseError(line, "empty user_id");
    if (ts <= 0) throw ParseError(line, "timestamp must be positive");
    if (!std::isfinite(value) || value < 0.0) throw ParseError(line, "value must be a non-negative number");
    SensorKind k;
    try {
        k = sensor_kind_from_string(kind);
    } catch (const ParameterError&) {
        throw RejectedRecordError(line, "unknown sensor kind '" + std::string(kind) + "'");
    }
    return Sample{std::move(user), ts, k, value};
}

Sample parse_csv_row(std::size_t line, std::string_view text) {
    auto fields = split(text, ',');
    if (fields.size() != 4) throw ParseError(line, "expected 4 fields, got " + std::to_string(fields.size()));
    std::int64_t ts = 0;
    if (!parse_number(fields[1], ts)) throw ParseError(line, "malformed timestamp '" + std::string(fields[1]) + "'");
    double value = 0.0;
    if (!parse_number(fields[3], value)) throw ParseError(line, "malformed value '" + std::string(fields[3]) + "'");
    return make_sample(line, std::string(fields[0]), ts, fields[2], value);
}

Sample parse_jsonl_row(std::size_t line, std::string_view text) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "expected a JSON object");
    auto field = [&](const char* key) -> const nlohmann::json& {
        auto it = obj.find(key);
        if (it == obj.end()) throw ParseError(line, std::string("missing key '") + key + "'");
        return *it;
    };
    const auto& user = field("user_id");
    const auto& ts = field("timestamp_ms");
    const auto& kind = field("kind");
    const auto& value = field("value");
    if (!user.is_string()) throw ParseError(line, "user_id must be a string");
    if (!ts.is_number_integer()) throw ParseError(line, "malformed timestamp");
    if (!kind.is_string()) throw ParseError(line, "kind must be a string");
    if (!value.is_number()) throw ParseError(line, "malformed value");
    return make_sample(line, user.get<std::string>(), ts.get<std::int64_t>(),
                       kind.get_ref<const std::string&>(), value.get<double>());
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

std::string_view to_string(SensorKind kind) {
    return kind == SensorKind::HeartRate ? "hr" : "steps";
}

SensorKind sensor_kind_from_string(std::string_view token) {
    if (token == "hr") return SensorKind::HeartRate;
    if (token == "steps") return SensorKind::Steps;
    throw ParameterError("unknown sensor kind '" + std::string(token) + "'");
}

std::vector<Sample> parse_samples(std::istream& input, InputFormat format) {
    std::vector<Sample> samples;
    std::string raw;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(input, raw)) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty()) continue;
        if (format == InputFormat::Csv) {
            if (first_content_line && line.starts_with("user_id")) {
                first_content_line = false;
                continue;
            }
            samples.push_back(parse_csv_row(line_no, line));
        } else {
            samples.push_back(parse_jsonl_row(line_no, line));
        }
        first_content_line = false;
    }
    return samples;
}

std::string format_date(LocalDate date) {
    std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

LocalDate parse_date(std::string_view text) {
    text = trim(text);
    int y = 0;
    unsigned m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_number(text.substr(0, 4), y) ||
        !parse_number(text.substr(5, 2), m) || !parse_number(text.substr(8, 2), d)) {
        throw ParameterError("malformed date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw ParameterError("invalid calendar date '" + std::string(text) + "'");
    return LocalDate{ymd};
}

unsigned month_of(LocalDate date) {
    return static_cast<unsigned>(std::chrono::year_month_day{date}.month());
}

unsigned day_of_month(LocalDate date) {
    return static_cast<unsigned>(std::chrono::year_month_day{date}.day());
}

unsigned weekday_of(LocalDate date) {
    return std::chrono::weekday{date}.c_encoding();
}

int DayPolicy::offset_for(const std::string& user_id) const {
    auto it = utc_offset_minutes.find(user_id);
    return it == utc_offset_minutes.end() ? default_offset_minutes : it->second;
}

void validate_utc_offset(int minutes) {
    if (minutes < -720 || minutes > 840) {
        throw ParameterError("UTC offset " + std::to_string(minutes) + " outside [-720, 840] minutes");
    }
}

LocalDate local_date_of(std::int64_t timestamp_ms, int utc_offset_minutes) {
    const std::int64_t local = timestamp_ms + utc_offset_minutes * kMsPerMinute;
    return LocalDate{std::chrono::days{floor_div(local, kMsPerDay)}};
}

std::int64_t local_time_of_day_ms(std::int64_t timestamp_ms, int utc_offset_minutes) {
    const std::int64_t local = timestamp_ms + utc_offset_minutes * kMsPerMinute;
    return local - floor_div(local, kMsPerDay) * kMsPerDay;
}

DayBuckets slice_days(std::span<const Sample> samples, const DayPolicy& policy) {
    validate_utc_offset(policy.default_offset_minutes);
    for (const auto& [user, offset] : policy.utc_offset_minutes) validate_utc_offset(offset);

    DayBuckets buckets;
    for (const auto& s : samples) {
        buckets[DayKey{s.user_id, local_date_of(s.timestamp_ms, policy.offset_for(s.user_id))}].push_back(s);
    }
    for (auto& [key, bucket] : buckets) {
        std::stable_sort(bucket.begin(), bucket.end(),
                         [](const Sample& a, const Sample& b) { return a.timestamp_ms < b.timestamp_ms; });
    }
    return buckets;
}

void validate_slot_minutes(int slot_minutes) {
    if (slot_minutes <= 0 || kMinutesPerDay % slot_minutes != 0) {
        throw ParameterError("slot_minutes " + std::to_string(slot_minutes) + " must be a positive divisor of 1440");
    }
}

std::size_t slots_per_day(int slot_minutes) {
    validate_slot_minutes(slot_minutes);
    return static_cast<std::size_t>(kMinutesPerDay / slot_minutes);
}

FixedSeries resample(std::span<const Sample> day_samples, int slot_minutes, int utc_offset_minutes,
                     SlotAggregation aggregation) {
    const std::size_t n = slots_per_day(slot_minutes);
    validate_utc_offset(utc_offset_minutes);
    if (day_samples.empty()) throw EmptyDayError("no samples for day");

    const auto& first = day_samples.front();
    const LocalDate date = local_date_of(first.timestamp_ms, utc_offset_minutes);
    std::vector<double> sums(n, 0.0);
    std::vector<std::size_t> counts(n, 0);
    const std::int64_t slot_ms = slot_minutes * kMsPerMinute;
    for (const auto& s : day_samples) {
        if (s.user_id != first.user_id || s.kind != first.kind ||
            local_date_of(s.timestamp_ms, utc_offset_minutes) != date) {
            throw ParameterError("resample expects samples of a single user, day and sensor kind");
        }
        const auto slot = static_cast<std::size_t>(local_time_of_day_ms(s.timestamp_ms, utc_offset_minutes) / slot_ms);
        sums[slot] += s.value;
        ++counts[slot];
    }

    FixedSeries out;
    out.user_id = first.user_id;
    out.date = date;
    out.slot_minutes = slot_minutes;
    out.slots.assign(n, 0.0);

    std::vector<std::size_t> filled;
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[i] == 0) continue;
        out.slots[i] = aggregation == SlotAggregation::Mean ? sums[i] / static_cast<double>(counts[i]) : sums[i];
        filled.push_back(i);
    }
    out.coverage = static_cast<double>(filled.size()) / static_cast<double>(n);
    out.observed.assign(n, false);
    for (auto i : filled) out.observed[i] = true;

    for (std::size_t i = 0; i < filled.front(); ++i) out.slots[i] = out.slots[filled.front()];
    for (std::size_t i = filled.back() + 1; i < n; ++i) out.slots[i] = out.slots[filled.back()];
    for (std::size_t f = 0; f + 1 < filled.size(); ++f) {
        const std::size_t lo = filled[f], hi = filled[f + 1];
        const double a = out.slots[lo], b = out.slots[hi];
        for (std::size_t i = lo + 1; i < hi; ++i) {
            out.slots[i] = a + (b - a) * static_cast<double>(i - lo) / static_cast<double>(hi - lo);
        }
    }
    return out;
}

FixedSeries normalize(const FixedSeries& series, double lo, double hi) {
    if (!(lo < hi)) throw ParameterError("normalization range requires lo < hi");
    if (series.normalized) throw ParameterError("series is already normalized");
    FixedSeries out = series;
    const double width = hi - lo;
    for (auto& v : out.slots) v = std::clamp((v - lo) / width, 0.0, 1.0);
    out.normalized = true;
    return out;
}

FixedSeries denormalize(const FixedSeries& series, double lo, double hi) {
    if (!(lo < hi)) throw ParameterError("normalization range requires lo < hi");
    if (!series.normalized) throw ParameterError("series is not normalized");
    FixedSeries out = series;
    for (auto& v : out.slots) v = lo + v * (hi - lo);
    out.normalized = false;
    return out;
}

SeriesFragment window_slice(const FixedSeries& series, int start_hour, int end_hour) {
    if (start_hour < 0 || start_hour >= end_hour || end_hour > 24) {
        throw ParameterError("window requires 0 <= start_hour < end_hour <= 24");
    }
    const int slot = series.slot_minutes;
    validate_slot_minutes(slot);
    if ((start_hour * 60) % slot != 0 || (end_hour * 60) % slot != 0) {
        throw AlignmentError("hours " + std::to_string(start_hour) + "-" + std::to_string(end_hour) +
                             " do not align with " + std::to_string(slot) + "-minute slots");
    }
    const auto first = static_cast<std::size_t>(start_hour * 60 / slot);
    const auto last = static_cast<std::size_t>(end_hour * 60 / slot);
    if (last > series.slots.size()) throw DimensionError("series shorter than its slot grid");

    SeriesFragment out;
    out.user_id = series.user_id;
    out.date = series.date;
    out.slot_minutes = slot;
    out.start_hour = start_hour;
    out.end_hour = end_hour;
    out.values.assign(series.slots.begin() + static_cast<std::ptrdiff_t>(first),
                      series.slots.begin() + static_cast<std::ptrdiff_t>(last));
    out.coverage = series.coverage;
    if (series.observed.size() == series.slots.size()) {
        const auto hits = std::count(series.observed.begin() + static_cast<std::ptrdiff_t>(first),
                                     series.observed.begin() + static_cast<std::ptrdiff_t>(last), true);
        out.coverage = static_cast<double>(hits) / static_cast<double>(last - first);
    }
    out.normalized = series.normalized;
    return out;
}

NightShiftResult night_shift_filter(std::span<const std::string> users,
                                    std::span<const FixedSeries> activity_days,
                                    const NightShiftPolicy& policy) {
    if (policy.threshold_steps < 0.0) throw ParameterError("threshold_steps must be non-negative");
    if (policy.day_fraction < 0.0 || policy.day_fraction > 1.0) throw ParameterError("day_fraction must lie in [0, 1]");

    struct Tally {
        std::size_t days = 0;
        std::size_t active_nights = 0;
    };
    std::map<std::string, Tally> tallies;
    for (const auto& day : activity_days) {
        const auto night = window_slice(day, policy.window_start_hour, policy.window_end_hour);
        double steps = 0.0;
        for (double v : night.values) steps += v;
        auto& t = tallies[day.user_id];
        ++t.days;
        if (steps > policy.threshold_steps) ++t.active_nights;
    }

    NightShiftResult result;
    std::set<std::string> seen;
    for (const auto& user : users) {
        if (!seen.insert(user).second) continue;
        auto it = tallies.find(user);
        if (it == tallies.end() || it->second.days == 0) {
            result.retained.push_back(user);
            result.unevaluated.push_back(user);
            continue;
        }
        const double fraction = static_cast<double>(it->second.active_nights) / static_cast<double>(it->second.days);
        if (it->second.active_nights > 0 && fraction >= policy.day_fraction) {
            result.excluded.push_back(user);
        } else {
            result.retained.push_back(user);
        }
    }
    return result;
}

void Corpus::validate() const {
    if (series.empty()) return;
    const auto& ref = series.front();
    validate_slot_minutes(ref.slot_minutes);
    const std::size_t n = slots_per_day(ref.slot_minutes);
    for (const auto& s : series) {
        if (s.slot_minutes != ref.slot_minutes || s.slots.size() != n) {
            throw DimensionError("corpus series disagree on slot grid (user " + s.user_id + ", " +
                                 format_date(s.date) + ")");
        }
        if (s.normalized != ref.normalized) throw DimensionError("corpus mixes normalized and raw series");
        if (s.coverage < 0.0 || s.coverage > 1.0) throw DimensionError("coverage outside [0, 1]");
    }
}

std::size_t Corpus::length() const {
    return series.empty() ? 0 : series.front().slots.size();
}

std::vector<std::string> Corpus::users() const {
    std::set<std::string> unique;
    for (const auto& s : series) unique.insert(s.user_id);
    return {unique.begin(), unique.end()};
}

Matrix Corpus::matrix() const {
    Matrix m;
    m.reserve(series.size());
    for (const auto& s : series) m.push_back(s.slots);
    return m;
}

CorpusBuild build_corpus(std::span<const Sample> samples, SensorKind kind, const CorpusBuildOptions& options) {
    validate_slot_minutes(options.slot_minutes);
    std::vector<Sample> selected;
    std::copy_if(samples.begin(), samples.end(), std::back_inserter(selected),
                 [kind](const Sample& s) { return s.kind == kind; });

    const auto aggregation = kind == SensorKind::Steps ? SlotAggregation::Sum : SlotAggregation::Mean;
    CorpusBuild build;
    build.corpus.kind = kind;
    for (const auto& [key, bucket] : slice_days(selected, options.days)) {
        auto series = resample(bucket, options.slot_minutes, options.days.offset_for(key.user_id), aggregation);
        if (series.coverage < options.min_coverage) {
            ++build.dropped_days;
            continue;
        }
        build.corpus.series.push_back(std::move(series));
    }
    return build;
}

Corpus normalize(const Corpus& corpus, double lo, double hi) {
    Corpus out;
    out.kind = corpus.kind;
    out.region = corpus.region;
    out.series.reserve(corpus.series.size());
    for (const auto& s : corpus.series) out.series.push_back(normalize(s, lo, hi));
    return out;
}

}  // namespace wearable
