#include "wearable/model_io.hpp"

#include "wearable/corpus_io.hpp"
#include "wearable/error.hpp"

namespace wearable {

nlohmann::json model_to_json(const ClusterModel& model, std::span<const SeriesId> series) {
    nlohmann::json j;
    j["algorithm"] = std::string(to_string(model.algorithm));
    j["params"] = model.params;
    j["n_clusters"] = model.n_clusters;
    j["seed"] = model.seed;
    j["labels"] = model.labels;
    j["prototypes"] = model.prototypes ? nlohmann::json(*model.prototypes) : nlohmann::json(nullptr);
    j["objective_trace"] = model.objective_trace;
    auto ids = nlohmann::json::array();
    for (const auto& s : series) ids.push_back({{"user_id", s.user_id}, {"date", s.date}});
    j["series"] = std::move(ids);
    return j;
}

StoredModel model_from_json(const nlohmann::json& j) {
    StoredModel stored;
    try {
        auto& m = stored.model;
        m.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
        m.params = j.at("params").get<std::map<std::string, double>>();
        m.n_clusters = j.at("n_clusters").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.labels = j.at("labels").get<std::vector<int>>();
        if (!j.at("prototypes").is_null()) m.prototypes = j.at("prototypes").get<Matrix>();
        m.objective_trace = j.value("objective_trace", std::vector<double>{});
        for (const auto& s : j.value("series", nlohmann::json::array())) {
            stored.series.push_back({s.at("user_id").get<std::string>(), s.at("date").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("malformed model JSON: ") + e.what());
    }
    stored.model.validate(stored.model.labels.size());
    if (!stored.series.empty() && stored.series.size() != stored.model.labels.size()) {
        throw ParameterError("model series ids do not match label count");
    }
    return stored;
}

void write_cluster_mean_csv(std::ostream& out, const ClusterSummary& summary) {
    out << "slot,mean,members\n";
    for (std::size_t i = 0; i < summary.mean.size(); ++i) {
        out << i << ',' << format_number(summary.mean[i]) << ',' << summary.members << '\n';
    }
}

}  // namespace wearable
