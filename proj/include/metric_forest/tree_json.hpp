#pragma once

#include <string>

#include <json.hpp>

#include "metric_forest/cover_tree.hpp"

namespace metric_forest {

/// JSON form: {"l_max":..,"l_min":..,"root":..,"nodes":[{"id","level","parent",
/// "children":{"<level>":[ids]}}]}. Round-trip stable.
inline nlohmann::json tree_to_json(const CompressedCoverTree& tree) {
    nlohmann::json j;
    j["l_max"] = tree.level_max();
    j["l_min"] = tree.level_min();
    j["root"] = tree.root();
    nlohmann::json nodes = nlohmann::json::array();
    for (PointId p = 0; p < tree.size(); ++p) {
        const auto& nd = tree.node(p);
        nlohmann::json n;
        n["id"] = p;
        n["level"] = nd.level;
        if (nd.parent == CompressedCoverTree::kNoParent)
            n["parent"] = nullptr;
        else
            n["parent"] = nd.parent;
        nlohmann::json ch = nlohmann::json::object();
        for (const auto& [lvl, kids] : nd.children) ch[std::to_string(lvl)] = kids;
        n["children"] = ch;
        nodes.push_back(std::move(n));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

inline CompressedCoverTree tree_from_json(const MetricSpaceView& space, const nlohmann::json& j) {
    std::vector<std::pair<Level, PointId>> lp(space.size(),
                                              {0, CompressedCoverTree::kNoParent});
    for (const auto& n : j.at("nodes")) {
        PointId id = n.at("id").get<PointId>();
        if (id >= lp.size()) throw data_error("node id out of range");
        Level lvl = n.at("level").get<Level>();
        PointId par = n.at("parent").is_null() ? CompressedCoverTree::kNoParent
                                               : n.at("parent").get<PointId>();
        lp[id] = {lvl, par};
    }
    return CompressedCoverTree::restore(space, lp);
}

}  // namespace metric_forest
