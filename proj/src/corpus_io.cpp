#include "wearable/corpus_io.hpp"

#include "wearable/error.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace wearable {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& text, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ParseError(line, "malformed number '" + text + "'");
    }
    return v;
}

}  // namespace

std::string format_number(double value) {
    if (value == 0.0) return "0";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, ptr};
}

void write_corpus_csv(std::ostream& out, const Corpus& corpus) {
    corpus.validate();
    const std::size_t n = corpus.series.empty() ? slots_per_day(30) : corpus.length();
    out << "user_id,date";
    for (std::size_t i = 0; i < n; ++i) out << ",slot_" << i;
    out << ",coverage\n";
    for (const auto& s : corpus.series) {
        out << s.user_id << ',' << format_date(s.date);
        for (double v : s.slots) out << ',' << format_number(v);
        out << ',' << format_number(s.coverage) << '\n';
    }
}

Corpus read_corpus_csv(std::istream& in, SensorKind kind, bool normalized) {
    Corpus corpus;
    corpus.kind = kind;
    std::string line;
    if (!std::getline(in, line)) return corpus;
    const auto header = split_csv(line);
    if (header.size() < 4 || header[0] != "user_id" || header[1] != "date" || header.back() != "coverage") {
        throw ParseError(1, "unexpected corpus header");
    }
    const std::size_t n = header.size() - 3;
    if (kMinutesPerDay % n != 0) throw ParseError(1, "slot count " + std::to_string(n) + " does not divide a day");
    const int slot_minutes = kMinutesPerDay / static_cast<int>(n);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields");
        }
        FixedSeries s;
        s.user_id = fields[0];
        try {
            s.date = parse_date(fields[1]);
        } catch (const ParameterError& e) {
            throw ParseError(line_no, e.what());
        }
        s.slot_minutes = slot_minutes;
        s.slots.reserve(n);
        for (std::size_t i = 0; i < n; ++i) s.slots.push_back(parse_double(fields[2 + i], line_no));
        s.coverage = parse_double(fields.back(), line_no);
        s.normalized = normalized;
        corpus.series.push_back(std::move(s));
    }
    corpus.validate();
    return corpus;
}

void write_samples_csv(std::ostream& out, std::span<const Sample> samples) {
    out << "user_id,timestamp_ms,kind,value\n";
    for (const auto& s : samples) {
        out << s.user_id << ',' << s.timestamp_ms << ',' << to_string(s.kind) << ',' << format_number(s.value) << '\n';
    }
}

DayPolicy read_offsets_csv(std::istream& in, int default_offset_minutes) {
    DayPolicy policy;
    validate_utc_offset(default_offset_minutes);
    policy.default_offset_minutes = default_offset_minutes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv(line);
        if (line_no == 1 && !fields.empty() && fields[0] == "user_id") continue;
        if (fields.size() != 2) throw ParseError(line_no, "expected user_id,utc_offset_minutes");
        int offset = 0;
        auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), offset);
        if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size()) {
            throw ParseError(line_no, "malformed offset '" + fields[1] + "'");
        }
        validate_utc_offset(offset);
        policy.utc_offset_minutes[fields[0]] = offset;
    }
    return policy;
}

}  // namespace wearable
