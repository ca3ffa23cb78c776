#pragma once

#include <cctype>
#include <string>
#include <vector>

#include <json.hpp>

#include "sds/errors.hpp"

namespace sds {

inline const std::vector<std::string>& evaluation_criteria() {
    static const std::vector<std::string> names = {"postural stability", "gait periodicity",
                                                   "trajectory adherence"};
    return names;
}

/// Integer 0-10 scores per evaluation criterion; the aggregate is their sum.
struct ScoreVector {
    std::vector<std::pair<std::string, int>> criteria;
    int aggregate = 0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["criteria"] = nlohmann::json::array();
        for (const auto& [name, score] : criteria)
            j["criteria"].push_back({{"name", name}, {"score", score}});
        j["aggregate"] = aggregate;
        return j;
    }

    static ScoreVector from_json(const nlohmann::json& j) {
        ScoreVector v;
        for (const auto& c : j.at("criteria"))
            v.criteria.emplace_back(c.at("name").get<std::string>(), c.at("score").get<int>());
        v.aggregate = j.at("aggregate").get<int>();
        return v;
    }
};

/// Extracts the first bracketed integer list from free-form model output.
/// Three-score vectors take the canonical criterion names.
inline ScoreVector parse_score_vector(const std::string& text) {
    for (std::size_t open = text.find('['); open != std::string::npos;
         open = text.find('[', open + 1)) {
        std::vector<int> scores;
        std::size_t pos = open + 1;
        bool valid = true;
        bool done = false;
        while (pos < text.size() && !done) {
            while (pos < text.size() &&
                   (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ','))
                ++pos;
            if (pos >= text.size()) {
                valid = false;
                break;
            }
            if (text[pos] == ']') {
                done = true;
                break;
            }
            if (!std::isdigit(static_cast<unsigned char>(text[pos]))) {
                valid = false;
                break;
            }
            int value = 0;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                value = value * 10 + (text[pos] - '0');
                ++pos;
            }
            scores.push_back(value);
        }
        if (!valid || !done || scores.empty()) continue;

        ScoreVector v;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            require(scores[i] <= 10, Errc::ScoreOutOfRange,
                    "score " + std::to_string(scores[i]) + " outside [0, 10]");
            const std::string name = i < evaluation_criteria().size()
                                         ? evaluation_criteria()[i]
                                         : "criterion_" + std::to_string(i);
            v.criteria.emplace_back(name, scores[i]);
            v.aggregate += scores[i];
        }
        return v;
    }
    fail(Errc::ScoreParseError, "no bracketed integer list in model output");
}

}  // namespace sds
