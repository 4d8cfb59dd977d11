#pragma once

#include "wearable/clustering.hpp"

#include <json.hpp>

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace wearable {

/// Identity of one clustered unit: a user-day, or a user's mean day (date "mean").
struct SeriesId {
    std::string user_id;
    std::string date;
};

struct StoredModel {
    ClusterModel model;
    std::vector<SeriesId> series;
};

/// {"algorithm", "params", "n_clusters", "seed", "labels", "prototypes",
///  "objective_trace", "series"}; "prototypes" is null when absent.
nlohmann::json model_to_json(const ClusterModel& model, std::span<const SeriesId> series = {});
StoredModel model_from_json(const nlohmann::json& j);

/// `slot,mean,members` rows for one cluster.
void write_cluster_mean_csv(std::ostream& out, const ClusterSummary& summary);

}  // namespace wearable
