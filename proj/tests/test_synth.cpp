#include <doctest.h>

#include "wearable/corpus_io.hpp"
#include "wearable/error.hpp"
#include "wearable/patterns.hpp"
#include "wearable/stats.hpp"
#include "wearable/synth.hpp"

#include <cmath>
#include <sstream>

using namespace wearable;

namespace {

using P = PatternLabel;

CorpusSpec small_spec() {
    CorpusSpec spec;
    spec.n_users = 12;
    spec.days_per_user = 7;
    spec.seed = 5;
    return spec;
}

std::string corpus_text(const Corpus& c) {
    std::ostringstream out;
    write_corpus_csv(out, c);
    return out.str();
}

}  // namespace

TEST_CASE("CorpusSpec validation") {
    CHECK_NOTHROW(CorpusSpec{}.validate());
    auto bad = [](auto edit) {
        CorpusSpec s;
        edit(s);
        return s;
    };
    CHECK_THROWS_AS(bad([](CorpusSpec& s) { s.n_users = 0; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](CorpusSpec& s) { s.cadence_minutes = 15; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](CorpusSpec& s) { s.noise_sigma = -0.1; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](CorpusSpec& s) { s.activity_peak_hour = 24; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](CorpusSpec& s) { s.weekend_activity_scale = 0.0; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](CorpusSpec& s) { s.pattern_mix = {{P::Valley, 0.5}}; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](CorpusSpec& s) { s.pattern_mix = {{P::Valley, 1.2}, {P::Peak, -0.2}}; }).validate(),
                    ParameterError);
    CHECK_THROWS_AS(bad([](CorpusSpec& s) { s.pattern_mix = {{P::Upward, 1.0}}; }).validate(), ParameterError);
    CHECK_THROWS_AS(gen_user(P::Upward, CorpusSpec{}, 0), ParameterError);
}

TEST_CASE("largest remainder allocation") {
    CHECK(largest_remainder(std::vector<double>{0.44, 0.295, 0.263, 0.002}, 100) ==
          std::vector<std::size_t>{44, 30, 26, 0});
    CHECK(largest_remainder(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, 10) == std::vector<std::size_t>{4, 3, 3});
    CHECK(largest_remainder(std::vector<double>{0.5, 0.5}, 7) == std::vector<std::size_t>{4, 3});
    CHECK(largest_remainder(std::vector<double>{0.25, 0.75}, 0) == std::vector<std::size_t>{0, 0});
}

TEST_CASE("planted counts for the default mix") {
    CorpusSpec spec;
    spec.n_users = 100;
    const auto counts = planted_counts(spec);
    CHECK(counts.at(P::Valley) == 44);
    CHECK(counts.at(P::Downward) == 30);
    CHECK(counts.at(P::Peak) == 26);
    CHECK(counts.at(P::Unclassified) == 0);

    spec.days_per_user = 1;
    const auto corpus = gen_corpus(spec);
    std::map<P, std::size_t> seen;
    for (const auto& [user, label] : corpus.planted) ++seen[label];
    for (const auto& [label, n] : counts) CHECK(seen[label] == n);
}

TEST_CASE("generation is reproducible") {
    const auto spec = small_spec();
    const auto a = gen_corpus(spec), b = gen_corpus(spec);
    CHECK(corpus_text(a.heart_rate) == corpus_text(b.heart_rate));
    CHECK(corpus_text(a.steps) == corpus_text(b.steps));
    CHECK(a.planted == b.planted);
    const auto u1 = gen_user(P::Peak, spec, 3), u2 = gen_user(P::Peak, spec, 3);
    for (std::size_t d = 0; d < u1.heart_rate.size(); ++d) CHECK(u1.heart_rate[d].slots == u2.heart_rate[d].slots);

    auto other = spec;
    other.seed = 6;
    CHECK(corpus_text(gen_corpus(other).heart_rate) != corpus_text(a.heart_rate));
}

TEST_CASE("a user's days do not depend on the corpus size") {
    auto spec = small_spec();
    const auto a = gen_user(P::Valley, spec, 4);
    spec.days_per_user = 3;
    const auto b = gen_user(P::Valley, spec, 4);
    for (std::size_t d = 0; d < 3; ++d) CHECK(a.heart_rate[d].slots == b.heart_rate[d].slots);
}

TEST_CASE("corpus shape") {
    const auto spec = small_spec();
    const auto c = gen_corpus(spec);
    CHECK(c.heart_rate.series.size() == 84);
    CHECK(c.steps.series.size() == 84);
    CHECK_NOTHROW(c.heart_rate.validate());
    CHECK(c.heart_rate.length() == 48);
    CHECK(c.series_patterns().size() == 84);
    CHECK(c.heart_rate.series[0].user_id == "u0000");
    CHECK(format_date(c.heart_rate.series[1].date) == "2019-01-02");
    CHECK(synthetic_user_id(7, 20000) == "u00007");
}

TEST_CASE("zero-noise templates are fixed points of the pipeline") {
    for (int cadence : {10, 30, 60}) {
        auto spec = small_spec();
        spec.noise_sigma = 0.0;
        spec.user_offset = 0.0;
        spec.cadence_minutes = cadence;
        for (auto p : {P::Valley, P::Downward, P::Peak, P::Unclassified}) {
            const auto user = gen_user(p, spec, 1);
            const auto tmpl = day_template(p, cadence);
            for (const auto& day : user.heart_rate) {
                // raw bpm -> samples at slot starts -> resample -> normalize
                std::vector<Sample> samples;
                const auto midnight = static_cast<std::int64_t>(day.date.time_since_epoch().count()) * 86'400'000;
                for (std::size_t i = 0; i < day.slots.size(); ++i) {
                    samples.push_back({day.user_id, midnight + static_cast<std::int64_t>(i) * cadence * 60'000,
                                       SensorKind::HeartRate, day.slots[i]});
                }
                const auto back = normalize(resample(samples, cadence));
                REQUIRE(back.slots.size() == tmpl.size());
                for (std::size_t i = 0; i < tmpl.size(); ++i) CHECK(back.slots[i] == doctest::Approx(tmpl[i]).epsilon(1e-12));
                CHECK(back.coverage == 1.0);
            }
        }
    }
}

TEST_CASE("templates stay inside the normalized range") {
    for (auto p : {P::Valley, P::Downward, P::Peak, P::Unclassified}) {
        for (double v : day_template(p, 10)) {
            CHECK(v >= 0.25);
            CHECK(v <= 0.75);
        }
    }
    CHECK(planted_day_trend(P::Valley) == P::Downward);
    CHECK(planted_day_trend(P::Peak) == P::Downward);
    CHECK(planted_day_trend(P::Downward) == P::Upward);
    CHECK(planted_day_trend(P::Unclassified) == P::Unclassified);
}

TEST_CASE("noisy days recover their planted label") {
    CorpusSpec spec;
    spec.n_users = 100;
    spec.days_per_user = 10;
    spec.noise_sigma = 0.02;
    spec.pattern_mix = {{P::Valley, 1.0 / 3}, {P::Downward, 1.0 / 3}, {P::Peak, 1.0 / 3}};
    spec.seed = 42;
    const auto c = gen_corpus(spec);
    std::size_t hits = 0;
    for (const auto& s : normalize(c.heart_rate).series) {
        hits += classify_sleep_pattern(window_slice(s, 0, 8)) == c.planted.at(s.user_id);
    }
    CHECK(hits >= 990);
}

TEST_CASE("activity peaks at the configured hour with a weekend deficit") {
    auto spec = small_spec();
    spec.noise_sigma = 0.0;
    spec.days_per_user = 14;
    const auto c = gen_corpus(spec);
    CHECK(temporal_aggregate(c.steps, BucketKind::HourOfDay).argmax() == 18);
    const auto week = temporal_aggregate(c.steps, BucketKind::DayOfWeek);
    BucketStats weekday;
    for (std::size_t d = 1; d < 7; ++d) weekday.merge(week.buckets[d]);
    CHECK(week.buckets[0].mean / weekday.mean == doctest::Approx(0.8).epsilon(1e-12));

    spec.activity_peak_hour = 7;
    CHECK(temporal_aggregate(gen_corpus(spec).steps, BucketKind::HourOfDay).argmax() == 7);
}

TEST_CASE("labels csv round trip") {
    const std::map<std::string, P> planted{{"u0000", P::Valley}, {"u0001", P::Downward}};
    std::ostringstream out;
    write_labels_csv(out, planted);
    CHECK(out.str() == "user_id,planted_pattern,planted_day_trend\nu0000,valley,downward\nu0001,downward,upward\n");
    std::istringstream in(out.str());
    CHECK(read_labels_csv(in) == planted);
    std::istringstream bad("user_id,planted_pattern\nu1,zigzag\n");
    CHECK_THROWS_AS(read_labels_csv(bad), ParseError);
}
