#include "wearable/cli.hpp"

#include "wearable/clustering.hpp"
#include "wearable/corpus_io.hpp"
#include "wearable/error.hpp"
#include "wearable/evaluation.hpp"
#include "wearable/model_io.hpp"
#include "wearable/patterns.hpp"
#include "wearable/stats.hpp"
#include "wearable/synth.hpp"
#include "wearable/timeseries.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace wearable::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Collects every output of one run and commits them together.
class OutputWriter {
public:
    explicit OutputWriter(fs::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

    void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }

    void commit() const {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
        for (const auto& [name, content] : files_) {
            const fs::path target = dir_ / name;
            const fs::path tmp = dir_ / (name + ".tmp");
            {
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                if (!out) throw IoError("cannot write " + tmp.string());
                out << content;
                if (!out.flush()) throw IoError("short write to " + tmp.string());
            }
            fs::rename(tmp, target, ec);
            if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
        }
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    return ss.str();
}

fs::path resolve_input(const std::string& path, const char* default_name) {
    fs::path p(path);
    if (fs::is_directory(p)) p /= default_name;
    return p;
}

Corpus load_corpus(const fs::path& path, SensorKind kind) {
    std::istringstream in(read_text(path));
    return read_corpus_csv(in, kind);
}

Corpus load_heart_rate(const std::string& in) {
    auto corpus = load_corpus(resolve_input(in, "corpus.csv"), SensorKind::HeartRate);
    if (corpus.series.empty()) throw InsufficientDataError("corpus has no series");
    return corpus;
}

std::optional<Corpus> load_steps(const std::string& in, const std::string& explicit_path) {
    fs::path p;
    if (!explicit_path.empty()) p = explicit_path;
    else if (fs::is_directory(in)) p = fs::path(in) / "steps.csv";
    else p = fs::path(in).parent_path() / "steps.csv";
    if (explicit_path.empty() && !fs::exists(p)) return std::nullopt;
    return load_corpus(p, SensorKind::Steps);
}

struct Units {
    Matrix x;
    std::vector<SeriesId> ids;
    std::size_t n_users = 0;
};

/// Clustering units: one normalized user-day each, or each user's mean day.
Units make_units(const Corpus& raw, const std::string& mode, double lo, double hi) {
    const Corpus corpus = normalize(raw, lo, hi);
    Units u;
    u.n_users = corpus.users().size();
    if (mode == "day") {
        for (const auto& s : corpus.series) {
            u.x.push_back(s.slots);
            u.ids.push_back({s.user_id, format_date(s.date)});
        }
        return u;
    }
    std::map<std::string, std::pair<std::vector<double>, std::size_t>> sums;
    for (const auto& s : corpus.series) {
        auto& [sum, count] = sums[s.user_id];
        if (sum.empty()) sum.assign(s.slots.size(), 0.0);
        for (std::size_t i = 0; i < s.slots.size(); ++i) sum[i] += s.slots[i];
        ++count;
    }
    for (auto& [user, acc] : sums) {
        for (double& v : acc.first) v /= static_cast<double>(acc.second);
        u.x.push_back(std::move(acc.first));
        u.ids.push_back({user, "mean"});
    }
    return u;
}

std::map<PatternLabel, double> parse_mix(const std::string& text) {
    std::map<PatternLabel, double> mix;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--mix expects label=fraction pairs");
        try {
            mix[pattern_from_string(trim(item.substr(0, eq)))] = std::stod(item.substr(eq + 1));
        } catch (const std::exception& e) {
            throw UsageError("bad --mix entry '" + item + "': " + e.what());
        }
    }
    return mix;
}

std::vector<Sample> corpus_samples(const Corpus& corpus) {
    std::vector<Sample> samples;
    for (const auto& s : corpus.series) {
        const std::int64_t day_ms = static_cast<std::int64_t>(s.date.time_since_epoch().count()) * kMsPerDay;
        for (std::size_t i = 0; i < s.slots.size(); ++i) {
            const std::int64_t ts = day_ms + static_cast<std::int64_t>(i) * s.slot_minutes * kMsPerMinute;
            samples.push_back({s.user_id, ts, corpus.kind, s.slots[i]});
        }
    }
    return samples;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
    int users = 100;
    int days = 14;
    double noise = 0.02;
    int cadence = 30;
    int peak_hour = 18;
    double weekend_scale = 0.8;
    double user_offset = 0.05;
    double peak_rate = 1200.0;
    std::string mix = "valley=0.44,downward=0.295,peak=0.263,unclassified=0.002";
    std::string start_date = "2019-01-01";
    std::uint64_t seed = 0;
    std::string out;
};

void run_synth(const SynthArgs& a, OutputWriter& w) {
    CorpusSpec spec;
    spec.n_users = a.users;
    spec.days_per_user = a.days;
    spec.pattern_mix = parse_mix(a.mix);
    spec.noise_sigma = a.noise;
    spec.cadence_minutes = a.cadence;
    spec.activity_peak_hour = a.peak_hour;
    spec.weekend_activity_scale = a.weekend_scale;
    spec.user_offset = a.user_offset;
    spec.activity_peak_rate = a.peak_rate;
    spec.seed = a.seed;
    try {
        spec.start_date = parse_date(a.start_date);
    } catch (const Error& e) {
        throw UsageError(std::string("--start-date: ") + e.what());
    }
    const auto corpus = gen_corpus(spec);
    w.add("corpus.csv", render([&](std::ostream& o) { write_corpus_csv(o, corpus.heart_rate); }));
    w.add("steps.csv", render([&](std::ostream& o) { write_corpus_csv(o, corpus.steps); }));
    w.add("labels.csv", render([&](std::ostream& o) { write_labels_csv(o, corpus.planted); }));
    auto samples = corpus_samples(corpus.heart_rate);
    auto steps = corpus_samples(corpus.steps);
    samples.insert(samples.end(), steps.begin(), steps.end());
    w.add("samples.csv", render([&](std::ostream& o) { write_samples_csv(o, samples); }));
}

// ---- ingest --------------------------------------------------------------

struct IngestArgs {
    std::string in;
    std::string format = "auto";
    std::string offsets;
    int default_offset = 0;
    int cadence = 30;
    double min_coverage = 0.5;
    bool night_shift = true;
    double night_threshold = 500.0;
    double night_fraction = 0.5;
    std::string out;
};

void run_ingest(const IngestArgs& a, OutputWriter& w) {
    InputFormat format = InputFormat::Csv;
    if (a.format == "jsonl" || (a.format == "auto" && fs::path(a.in).extension() == ".jsonl")) {
        format = InputFormat::Jsonl;
    }
    validate_utc_offset(a.default_offset);
    CorpusBuildOptions options;
    options.slot_minutes = a.cadence;
    options.min_coverage = a.min_coverage;
    options.days.default_offset_minutes = a.default_offset;
    if (!a.offsets.empty()) {
        std::istringstream in(read_text(a.offsets));
        options.days = read_offsets_csv(in, a.default_offset);
    }
    std::istringstream in(read_text(a.in));
    const auto samples = parse_samples(in, format);
    auto hr = build_corpus(samples, SensorKind::HeartRate, options);
    auto steps = build_corpus(samples, SensorKind::Steps, options);

    json summary;
    summary["samples"] = samples.size();
    summary["heart_rate_days"] = hr.corpus.series.size();
    summary["steps_days"] = steps.corpus.series.size();
    summary["dropped_heart_rate_days"] = hr.dropped_days;
    summary["dropped_steps_days"] = steps.dropped_days;
    summary["excluded_users"] = json::array();
    summary["unevaluated_users"] = json::array();
    if (a.night_shift) {
        NightShiftPolicy policy;
        policy.threshold_steps = a.night_threshold;
        policy.day_fraction = a.night_fraction;
        const auto users = hr.corpus.users();
        const auto result = night_shift_filter(users, steps.corpus.series, policy);
        summary["excluded_users"] = result.excluded;
        summary["unevaluated_users"] = result.unevaluated;
        auto drop = [&](Corpus& c) {
            std::erase_if(c.series, [&](const FixedSeries& s) {
                return std::binary_search(result.excluded.begin(), result.excluded.end(), s.user_id);
            });
        };
        drop(hr.corpus);
        drop(steps.corpus);
    }
    w.add("corpus.csv", render([&](std::ostream& o) { write_corpus_csv(o, hr.corpus); }));
    w.add("steps.csv", render([&](std::ostream& o) { write_corpus_csv(o, steps.corpus); }));
    w.add_json("ingest.json", summary);
}

// ---- cluster -------------------------------------------------------------

const std::vector<std::string> kAlgorithms = {"kmeans", "kshape", "kernel-kmeans", "dbscan", "optics", "ward", "som"};

struct ClusterArgs {
    std::string in;
    std::string algo;
    std::string unit = "day";
    int k = 0;
    std::uint64_t seed = 0;
    int n_init = 10;
    int max_iter = 0;
    double gamma = 0.0;
    bool linear_kernel = false;
    double eps = 0.0;
    int min_pts = 5;
    int rows = 0;
    int cols = 0;
    int iterations = 10000;
    double learning_rate = 0.5;
    double radius = 0.0;
    double lo = kHeartRateFloor;
    double hi = kHeartRateCeiling;
    std::string out;
};

void require_k(const ClusterArgs& a) {
    if (a.k < 1) throw UsageError("--k is required for " + a.algo);
}

void run_cluster(const ClusterArgs& a, OutputWriter& w) {
    const Algorithm algo = algorithm_from_string(a.algo);
    const auto units = make_units(load_heart_rate(a.in), a.unit, a.lo, a.hi);
    ClusterModel model;
    std::optional<OpticsResult> optics;
    switch (algo) {
        case Algorithm::KMeans: {
            require_k(a);
            KMeansOptions o{a.k, a.seed};
            o.n_init = a.n_init;
            if (a.max_iter > 0) o.max_iter = a.max_iter;
            model = kmeans_fit(units.x, o);
            break;
        }
        case Algorithm::KShape: {
            require_k(a);
            KShapeOptions o{a.k, a.seed};
            o.n_init = a.n_init;
            if (a.max_iter > 0) o.max_iter = a.max_iter;
            model = kshape_fit(units.x, o);
            break;
        }
        case Algorithm::KernelKMeans: {
            require_k(a);
            KernelKMeansOptions o;
            o.k = a.k;
            o.seed = a.seed;
            o.n_init = a.n_init;
            if (a.max_iter > 0) o.max_iter = a.max_iter;
            if (a.linear_kernel) o.kernel.kind = KernelKind::Linear;
            else o.kernel.gamma = a.gamma > 0.0 ? a.gamma : median_heuristic_gamma(units.x);
            model = kernel_kmeans_fit(units.x, o);
            break;
        }
        case Algorithm::Dbscan: {
            const double eps = a.eps > 0.0 ? a.eps : default_density_eps(units.x);
            model = dbscan_fit(units.x, {eps, a.min_pts});
            break;
        }
        case Algorithm::Optics: {
            const double eps = a.eps > 0.0 ? a.eps : default_density_eps(units.x);
            optics = optics_fit(units.x, {a.min_pts, eps});
            model = optics->model;
            break;
        }
        case Algorithm::Ward:
            require_k(a);
            model = ward_fit(units.x, a.k);
            break;
        case Algorithm::Som: {
            SomGrid grid = SomGrid::square_for_users(static_cast<int>(units.n_users));
            if (a.rows > 0) grid.rows = a.rows;
            if (a.cols > 0) grid.cols = a.cols;
            grid.iterations = a.iterations;
            grid.initial_learning_rate = a.learning_rate;
            grid.initial_radius = a.radius;
            model = som_fit(units.x, grid, a.seed);
            break;
        }
    }
    w.add_json("model.json", model_to_json(model, units.ids));
    for (const auto& summary : cluster_summary(model, units.x)) {
        w.add("cluster_" + std::to_string(summary.label) + ".csv",
              render([&](std::ostream& o) { write_cluster_mean_csv(o, summary); }));
    }
    if (optics) {
        w.add("reachability.csv", render([&](std::ostream& o) {
                  o << "position,index,reachability,core_distance\n";
                  auto num = [](double v) { return std::isfinite(v) ? format_number(v) : std::string(); };
                  for (std::size_t p = 0; p < optics->ordering.size(); ++p) {
                      const auto i = optics->ordering[p];
                      o << p << ',' << i << ',' << num(optics->reachability[p]) << ','
                        << num(optics->core_distance[i]) << '\n';
                  }
              }));
    }
}

// ---- select-k ------------------------------------------------------------

struct SelectKArgs {
    std::string in;
    std::string algo = "kmeans";
    std::string unit = "day";
    int k_min = 2;
    int k_max = 10;
    int n_init = 10;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    double lo = kHeartRateFloor;
    double hi = kHeartRateCeiling;
    std::string out;
};

void run_select_k(const SelectKArgs& a, OutputWriter& w) {
    if (a.k_min > a.k_max) throw UsageError("--k-min must not exceed --k-max");
    const auto units = make_units(load_heart_rate(a.in), a.unit, a.lo, a.hi);
    SweepOptions o;
    o.algorithm = algorithm_from_string(a.algo);
    o.k_min = a.k_min;
    o.k_max = a.k_max;
    o.seed = a.seed;
    o.gamma = a.gamma;
    o.n_init = a.n_init;
    const auto report = select_k(units.x, o);
    w.add("sweep.csv", render([&](std::ostream& os) { write_sweep_csv(os, report); }));
    w.add_json("select_k.json", to_json(report));
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
    std::string model;
    std::string truth;
    std::string annotator;
    std::string out;
};

std::map<std::string, PatternLabel> load_labels(const std::string& path) {
    std::istringstream in(read_text(path));
    return read_labels_csv(in);
}

json evaluate_model(const StoredModel& stored, const std::map<std::string, PatternLabel>& truth,
                    const std::map<std::string, PatternLabel>* annotator) {
    if (stored.series.empty()) throw ParameterError("model carries no series ids");
    std::vector<std::string> truth_names;
    for (const auto& id : stored.series) {
        auto it = truth.find(id.user_id);
        if (it == truth.end()) throw ParameterError("no truth label for user " + id.user_id);
        truth_names.emplace_back(to_string(it->second));
    }
    const auto codes = encode_categories(truth_names);
    json j;
    j["algorithm"] = std::string(to_string(stored.model.algorithm));
    j["extrinsic"] = to_json(extrinsic_scores(stored.model.labels, codes));
    j["purity"] = j["extrinsic"]["purity"];
    j["rand_index"] = j["extrinsic"]["rand_index"];
    if (annotator) {
        std::vector<std::string> first, second;
        for (const auto& [user, label] : truth) {
            auto it = annotator->find(user);
            if (it == annotator->end()) continue;
            first.emplace_back(to_string(label));
            second.emplace_back(to_string(it->second));
        }
        if (first.empty()) throw ParameterError("annotator shares no users with the truth labels");
        j["annotator_kappa"] = cohens_kappa(first, second);
        j["annotator_users"] = first.size();
    }
    return j;
}

StoredModel load_model(const std::string& path) {
    const auto text = read_text(resolve_input(path, "model.json"));
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string("model JSON: ") + e.what());
    }
    return model_from_json(j);
}

json run_evaluate(const EvaluateArgs& a, OutputWriter* w) {
    const auto stored = load_model(a.model);
    const auto truth = load_labels(a.truth);
    std::optional<std::map<std::string, PatternLabel>> annotator;
    if (!a.annotator.empty()) annotator = load_labels(a.annotator);
    auto j = evaluate_model(stored, truth, annotator ? &*annotator : nullptr);
    if (w) w->add_json("evaluation.json", j);
    return j;
}

// ---- patterns ------------------------------------------------------------

struct PatternsArgs {
    std::string in;
    double lo = kHeartRateFloor;
    double hi = kHeartRateCeiling;
    int smoothing = 1;
    double slope_tol = 0.02;
    double band = 0.25;
    double min_coverage = 0.5;
    std::string out;
};

json run_patterns(const PatternsArgs& a, const Corpus& raw, OutputWriter& w) {
    const Corpus corpus = normalize(raw, a.lo, a.hi);
    SleepClassifierParams sleep_params{a.smoothing, a.slope_tol, a.band, a.min_coverage};
    DayTrendParams day_params{a.slope_tol, a.min_coverage};

    std::vector<DayPattern> sleep, day;
    std::size_t skipped_sleep = 0, skipped_day = 0;
    std::ostringstream days_csv;
    days_csv << "user_id,date,sleep_pattern,day_trend\n";
    for (const auto& s : corpus.series) {
        std::string sleep_name, day_name;
        try {
            const auto label = classify_sleep_pattern(window_slice(s, kSleepStartHour, kSleepEndHour), sleep_params);
            sleep.push_back({s.user_id, s.date, label});
            sleep_name = to_string(label);
        } catch (const InsufficientDataError&) {
            ++skipped_sleep;
        }
        try {
            const auto label = classify_day_trend(window_slice(s, kDayStartHour, kDayEndHour), day_params);
            day.push_back({s.user_id, s.date, label});
            day_name = to_string(label);
        } catch (const InsufficientDataError&) {
            ++skipped_day;
        }
        days_csv << s.user_id << ',' << format_date(s.date) << ',' << sleep_name << ',' << day_name << '\n';
    }
    if (sleep.empty()) throw InsufficientDataError("no day had enough sleep-window coverage");

    std::vector<Cohort> cohorts = {Cohort::all()};
    for (auto season : {Season::Winter, Season::Spring, Season::Summer, Season::Fall}) {
        cohorts.push_back(Cohort::of_season(season));
    }
    cohorts.push_back(Cohort::weekday());
    cohorts.push_back(Cohort::weekend());
    std::vector<PatternDistribution> distributions;
    json cohorts_json = json::array();
    for (const auto& c : cohorts) {
        try {
            distributions.push_back(pattern_distribution(sleep, c));
        } catch (const EmptyCohortError&) {
            continue;
        }
        const auto& d = distributions.back();
        json fractions;
        for (auto p : kAllPatterns) fractions[std::string(to_string(p))] = d.fractions.at(p);
        cohorts_json.push_back({{"cohort", c.name()}, {"n_users", d.n_users}, {"fractions", fractions}});
    }

    std::map<std::string, std::vector<PatternLabel>> per_user_sleep, per_user_day;
    for (const auto& d : sleep) per_user_sleep[d.user_id].push_back(d.label);
    for (const auto& d : day) per_user_day[d.user_id].push_back(d.label);
    std::ostringstream users_csv;
    users_csv << "user_id,sleep_pattern,day_trend\n";
    for (const auto& [user, labels] : per_user_sleep) {
        users_csv << user << ',' << to_string(user_majority_pattern(labels)) << ',';
        if (auto it = per_user_day.find(user); it != per_user_day.end()) {
            users_csv << to_string(user_majority_pattern(it->second));
        }
        users_csv << '\n';
    }

    const auto table = pattern_crosstab(sleep, day);
    std::ostringstream cross_csv;
    cross_csv << "sleep_pattern,day_trend,count\n";
    for (const auto& [key, count] : table) {
        cross_csv << to_string(key.first) << ',' << to_string(key.second) << ',' << count << '\n';
    }

    w.add("day_patterns.csv", days_csv.str());
    w.add("user_patterns.csv", users_csv.str());
    w.add("distribution.csv", render([&](std::ostream& o) { write_distribution_csv(o, distributions); }));
    w.add("crosstab.csv", cross_csv.str());
    json summary;
    summary["classified_sleep_days"] = sleep.size();
    summary["classified_day_trends"] = day.size();
    summary["skipped_sleep_days"] = skipped_sleep;
    summary["skipped_day_trends"] = skipped_day;
    summary["cohorts"] = cohorts_json;
    return summary;
}

// ---- stats ---------------------------------------------------------------

struct StatsArgs {
    std::string in;
    std::string steps;
    double alpha = 0.05;
    std::string out;
};

double series_mean(const FixedSeries& s) {
    double sum = 0.0;
    for (double v : s.slots) sum += v;
    return s.slots.empty() ? 0.0 : sum / static_cast<double>(s.slots.size());
}

double series_total(const FixedSeries& s) {
    double sum = 0.0;
    for (double v : s.slots) sum += v;
    return sum;
}

json weekend_comparison(const Corpus& corpus, double (*reduce)(const FixedSeries&), double alpha) {
    std::vector<double> weekday, weekend;
    for (const auto& s : corpus.series) (weekday_of(s.date) == 0 ? weekend : weekday).push_back(reduce(s));
    if (weekday.empty() || weekend.empty()) return nullptr;
    return to_json(gated_comparison(weekday, weekend, alpha));
}

void add_profiles(const Corpus& corpus, const std::string& prefix, OutputWriter& w) {
    for (auto kind : {BucketKind::HourOfDay, BucketKind::DayOfWeek, BucketKind::DayOfMonth, BucketKind::MonthOfYear}) {
        const auto profile = temporal_aggregate(corpus, kind);
        w.add(prefix + std::string(to_string(kind)) + ".csv",
              render([&](std::ostream& o) { write_profile_csv(o, profile); }));
    }
}

json run_stats(const StatsArgs& a, const Corpus& hr, const std::optional<Corpus>& steps, OutputWriter& w) {
    if (!(a.alpha >= 0.0 && a.alpha <= 1.0)) throw UsageError("--alpha must lie in [0, 1]");
    add_profiles(hr, "profile_hr_", w);
    json j;
    j["alpha"] = a.alpha;
    j["heart_rate_weekend_vs_weekday"] = weekend_comparison(hr, series_mean, a.alpha);

    std::map<std::string, std::pair<double, std::size_t>> user_means;
    for (const auto& s : hr.series) {
        auto& [sum, n] = user_means[s.user_id];
        sum += series_mean(s);
        ++n;
    }
    std::vector<double> means;
    for (const auto& [user, acc] : user_means) means.push_back(acc.first / static_cast<double>(acc.second));
    j["heart_rate_bands"] = to_json(heart_rate_bands(means));

    if (steps && !steps->series.empty()) {
        add_profiles(*steps, "profile_steps_", w);
        j["steps_weekend_vs_weekday"] = weekend_comparison(*steps, series_total, a.alpha);
        std::map<DayKey, double> totals;
        for (const auto& s : steps->series) totals[{s.user_id, s.date}] = series_total(s);
        std::vector<double> x, y;
        for (const auto& s : hr.series) {
            auto it = totals.find({s.user_id, s.date});
            if (it == totals.end()) continue;
            x.push_back(series_mean(s));
            y.push_back(it->second);
        }
        j["heart_rate_vs_steps"] = x.size() >= 3 ? to_json(correlations(x, y)) : json(nullptr);
        j["paired_days"] = x.size();
    }
    return j;
}

// ---- report --------------------------------------------------------------

struct ReportArgs {
    std::string in;
    std::string model;
    std::string truth;
    double alpha = 0.05;
    std::string out;
};

void run_report(const ReportArgs& a, OutputWriter& w) {
    const auto hr = load_heart_rate(a.in);
    const auto steps = load_steps(a.in, "");
    json j;
    j["corpus"] = {{"users", hr.users().size()}, {"days", hr.series.size()}, {"slot_minutes", hr.series.front().slot_minutes}};
    PatternsArgs pattern_args;
    j["patterns"] = run_patterns(pattern_args, hr, w);
    StatsArgs stats_args;
    stats_args.alpha = a.alpha;
    j["stats"] = run_stats(stats_args, hr, steps, w);
    if (!a.model.empty()) {
        const auto stored = load_model(a.model);
        std::map<int, std::size_t> sizes;
        for (int l : stored.model.labels) ++sizes[l];
        json clusters = json::array();
        for (const auto& [label, n] : sizes) clusters.push_back({{"label", label}, {"members", n}});
        j["model"] = {{"algorithm", std::string(to_string(stored.model.algorithm))},
                      {"n_clusters", stored.model.n_clusters},
                      {"clusters", clusters}};
        if (!a.truth.empty()) j["model"]["evaluation"] = evaluate_model(stored, load_labels(a.truth), nullptr);
    }
    w.add_json("report.json", j);
}

// ---- plumbing ------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos || trim(text.substr(0, eq)).empty()) {
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        entries.emplace_back(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }
    return entries;
}

struct Prepared {
    std::vector<std::string> tokens;
    std::vector<std::pair<std::string, std::string>> config;
    std::string config_path;
};

Prepared splice_config(const std::vector<std::string>& args) {
    Prepared p;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file");
            p.config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            p.config_path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!p.config_path.empty()) p.config = read_config(p.config_path);
    if (p.config.empty() || rest.empty() || rest.front().starts_with("-")) {
        p.tokens = std::move(rest);
        return p;
    }
    p.tokens.push_back(rest.front());
    for (const auto& [key, value] : p.config) p.tokens.push_back("--" + key + "=" + value);
    p.tokens.insert(p.tokens.end(), rest.begin() + 1, rest.end());
    return p;
}

void add_normalization(CLI::App* sub, double& lo, double& hi) {
    sub->add_option("--lo", lo, "Heart-rate value mapped to 0");
    sub->add_option("--hi", hi, "Heart-rate value mapped to 1");
}

std::string run_log(const CLI::App& sub, const std::string& config_path) {
    std::ostringstream log;
    log << "command = " << sub.get_name() << '\n';
    if (!config_path.empty()) log << "config = " << config_path << '\n';
    log << sub.config_to_str(true, false);
    return log.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Prepared prepared;
    try {
        prepared = splice_config(args);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    CLI::App app{"Wearable heart-rate and activity time-series analysis", "wearable"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 1 data error, 2 usage error.");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    s->add_option("--users", synth.users, "Number of users")->check(CLI::PositiveNumber);
    s->add_option("--days", synth.days, "Days per user")->check(CLI::PositiveNumber);
    s->add_option("--noise", synth.noise, "Gaussian noise sigma, normalized units")->check(CLI::NonNegativeNumber);
    s->add_option("--cadence", synth.cadence, "Slot width in minutes")->check(CLI::IsMember({10, 30, 60}));
    s->add_option("--peak-hour", synth.peak_hour, "Hour of peak activity")->check(CLI::Range(0, 23));
    s->add_option("--weekend-scale", synth.weekend_scale, "Sunday activity multiplier");
    s->add_option("--user-offset", synth.user_offset, "Half width of the per-user level shift");
    s->add_option("--peak-rate", synth.peak_rate, "Steps per hour at the activity peak");
    s->add_option("--mix", synth.mix, "Sleep pattern mix, label=fraction,...");
    s->add_option("--start-date", synth.start_date, "First day, YYYY-MM-DD");
    s->add_option("--seed", synth.seed, "Random seed");
    s->add_option("--out", synth.out, "Output directory")->required();

    IngestArgs ingest;
    auto* g = app.add_subcommand("ingest", "Build daily corpora from raw sensor records");
    g->add_option("--in", ingest.in, "Records file (CSV or JSON lines)")->required();
    g->add_option("--format", ingest.format, "csv, jsonl or auto")->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    g->add_option("--offsets", ingest.offsets, "CSV of user_id,utc_offset_minutes");
    g->add_option("--default-offset", ingest.default_offset, "UTC offset in minutes for unlisted users");
    g->add_option("--cadence", ingest.cadence, "Slot width in minutes");
    g->add_option("--min-coverage", ingest.min_coverage, "Drop days below this coverage");
    g->add_flag("--night-shift,!--no-night-shift", ingest.night_shift, "Exclude night-shift users");
    g->add_option("--night-threshold", ingest.night_threshold, "Night step total marking an active night");
    g->add_option("--night-fraction", ingest.night_fraction, "Share of active nights that excludes a user");
    g->add_option("--out", ingest.out, "Output directory")->required();

    ClusterArgs cluster;
    auto* c = app.add_subcommand("cluster", "Fit one clustering model");
    c->add_option("--in", cluster.in, "Corpus CSV or directory holding corpus.csv")->required();
    c->add_option("--algo", cluster.algo, "Algorithm")->required()->check(CLI::IsMember(kAlgorithms));
    c->add_option("--unit", cluster.unit, "day or user-mean")->check(CLI::IsMember({"day", "user-mean"}));
    c->add_option("--k", cluster.k, "Cluster count (kmeans, kshape, kernel-kmeans, ward)");
    c->add_option("--seed", cluster.seed, "Random seed");
    c->add_option("--n-init", cluster.n_init, "Seeded restarts")->check(CLI::PositiveNumber);
    c->add_option("--max-iter", cluster.max_iter, "Iteration cap (0 keeps the algorithm default)");
    c->add_option("--gamma", cluster.gamma, "RBF gamma (0 selects the median heuristic)");
    c->add_flag("--linear-kernel", cluster.linear_kernel, "Kernel k-means with the linear kernel");
    c->add_option("--eps", cluster.eps, "Density radius (0 selects the data-driven default)");
    c->add_option("--min-pts", cluster.min_pts, "Density core threshold")->check(CLI::PositiveNumber);
    c->add_option("--rows", cluster.rows, "SOM rows (0 derives the grid from the user count)");
    c->add_option("--cols", cluster.cols, "SOM columns");
    c->add_option("--iterations", cluster.iterations, "SOM iterations")->check(CLI::PositiveNumber);
    c->add_option("--learning-rate", cluster.learning_rate, "SOM initial learning rate");
    c->add_option("--radius", cluster.radius, "SOM initial radius (0 selects max(rows, cols) / 2)");
    add_normalization(c, cluster.lo, cluster.hi);
    c->add_option("--out", cluster.out, "Output directory")->required();

    SelectKArgs sweep;
    auto* k = app.add_subcommand("select-k", "Sweep k and score each fit");
    k->add_option("--in", sweep.in, "Corpus CSV or directory holding corpus.csv")->required();
    k->add_option("--algo", sweep.algo, "Algorithm")->check(CLI::IsMember({"kmeans", "kshape", "kernel-kmeans", "ward"}));
    k->add_option("--unit", sweep.unit, "day or user-mean")->check(CLI::IsMember({"day", "user-mean"}));
    k->add_option("--k-min", sweep.k_min, "Smallest k")->check(CLI::PositiveNumber);
    k->add_option("--k-max", sweep.k_max, "Largest k")->check(CLI::PositiveNumber);
    k->add_option("--n-init", sweep.n_init, "Seeded restarts")->check(CLI::PositiveNumber);
    k->add_option("--gamma", sweep.gamma, "RBF gamma for kernel-kmeans (0 selects the median heuristic)");
    k->add_option("--seed", sweep.seed, "Random seed");
    add_normalization(k, sweep.lo, sweep.hi);
    k->add_option("--out", sweep.out, "Output directory")->required();

    EvaluateArgs evaluate;
    auto* e = app.add_subcommand("evaluate", "Score a fitted model against planted labels");
    e->add_option("--model", evaluate.model, "model.json or its directory")->required();
    e->add_option("--truth", evaluate.truth, "labels.csv with user_id,planted_pattern")->required();
    e->add_option("--annotator", evaluate.annotator, "Second labels file for Cohen's kappa");
    e->add_option("--out", evaluate.out, "Output directory (JSON is always printed)");

    PatternsArgs patterns;
    auto* p = app.add_subcommand("patterns", "Classify sleep and daytime heart-rate patterns");
    p->add_option("--in", patterns.in, "Corpus CSV or directory holding corpus.csv")->required();
    p->add_option("--smoothing", patterns.smoothing, "Moving-average radius in slots")->check(CLI::NonNegativeNumber);
    p->add_option("--slope-tol", patterns.slope_tol, "Slope / extremum tolerance after rescaling");
    p->add_option("--band", patterns.band, "Central band margin")->check(CLI::Range(0.0, 0.5));
    p->add_option("--min-coverage", patterns.min_coverage, "Skip windows below this coverage");
    add_normalization(p, patterns.lo, patterns.hi);
    p->add_option("--out", patterns.out, "Output directory")->required();

    StatsArgs stats;
    auto* t = app.add_subcommand("stats", "Temporal profiles and gated comparisons");
    t->add_option("--in", stats.in, "Corpus CSV or directory holding corpus.csv")->required();
    t->add_option("--steps", stats.steps, "Steps corpus (default: steps.csv beside the input)");
    t->add_option("--alpha", stats.alpha, "KS significance level");
    t->add_option("--out", stats.out, "Output directory")->required();

    ReportArgs report;
    auto* r = app.add_subcommand("report", "Patterns, statistics and model summary in one pass");
    r->add_option("--in", report.in, "Corpus directory")->required();
    r->add_option("--model", report.model, "model.json or its directory");
    r->add_option("--truth", report.truth, "labels.csv for model evaluation");
    r->add_option("--alpha", report.alpha, "KS significance level");
    r->add_option("--out", report.out, "Output directory")->required();

    CLI::App* selected = nullptr;
    if (!prepared.config.empty() && !prepared.tokens.empty()) {
        selected = app.get_subcommand_no_throw(prepared.tokens.front());
        if (selected) {
            for (const auto& [key, value] : prepared.config) {
                if (!selected->get_option_no_throw("--" + key)) {
                    err << "error: unknown config key '" << key << "' for " << selected->get_name() << "\n\n"
                        << selected->help();
                    return kExitUsage;
                }
            }
        }
    }

    std::vector<std::string> argv_store = {"wearable"};
    argv_store.insert(argv_store.end(), prepared.tokens.begin(), prepared.tokens.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& ex) {
        return app.exit(ex, out, err);
    } catch (const CLI::ParseError& ex) {
        err << "error: " << ex.what() << "\n\n";
        const auto parsed = app.get_subcommands();
        err << (parsed.empty() ? app.help() : parsed.front()->help());
        return kExitUsage;
    }
    selected = app.get_subcommands().front();

    try {
        const auto log = run_log(*selected, prepared.config_path);
        if (selected == s) {
            OutputWriter w(synth.out);
            run_synth(synth, w);
            w.add("run.log", log);
            w.commit();
        } else if (selected == g) {
            OutputWriter w(ingest.out);
            run_ingest(ingest, w);
            w.add("run.log", log);
            w.commit();
        } else if (selected == c) {
            OutputWriter w(cluster.out);
            run_cluster(cluster, w);
            w.add("run.log", log);
            w.commit();
        } else if (selected == k) {
            OutputWriter w(sweep.out);
            run_select_k(sweep, w);
            w.add("run.log", log);
            w.commit();
        } else if (selected == e) {
            std::optional<OutputWriter> w;
            if (!evaluate.out.empty()) w.emplace(evaluate.out);
            const auto j = run_evaluate(evaluate, w ? &*w : nullptr);
            if (w) {
                w->add("run.log", log);
                w->commit();
            }
            out << j.dump(2) << '\n';
        } else if (selected == p) {
            OutputWriter w(patterns.out);
            w.add_json("patterns.json", run_patterns(patterns, load_heart_rate(patterns.in), w));
            w.add("run.log", log);
            w.commit();
        } else if (selected == t) {
            OutputWriter w(stats.out);
            w.add_json("stats.json", run_stats(stats, load_heart_rate(stats.in), load_steps(stats.in, stats.steps), w));
            w.add("run.log", log);
            w.commit();
        } else if (selected == r) {
            OutputWriter w(report.out);
            run_report(report, w);
            w.add("run.log", log);
            w.commit();
        }
    } catch (const UsageError& ex) {
        err << "error: " << ex.what() << "\n\n" << selected->help();
        return kExitUsage;
    } catch (const ParseError& ex) {
        err << "error: line " << ex.line() << ": " << ex.what() << '\n';
        return kExitDataError;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitDataError;
    }
    return kExitOk;
}

}  // namespace wearable::cli
