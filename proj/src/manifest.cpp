#include "viewcast/manifest.hpp"

#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "viewcast/errors.hpp"

namespace viewcast {

ScoreManifest::ScoreManifest(std::vector<std::string> scores, std::string version)
    : scores_(std::move(scores)), version_(std::move(version)) {
    check();
}

void ScoreManifest::check() const {
    if (scores_.empty()) throw InvalidSpecError("score manifest is empty");
    std::unordered_set<std::string> seen;
    for (const auto& name : scores_) {
        if (name.empty()) throw InvalidSpecError("score manifest contains an empty name");
        if (!seen.insert(name).second)
            throw InvalidSpecError("score manifest repeats name '" + name + "'");
    }
}

ScoreManifest ScoreManifest::builtin_default() {
    // 11 emotion/cognition/style scores plus 32 LIWC-style categories, 43 total.
    return ScoreManifest(
        {
            "Anger",        "Joy",         "Fear",        "Positive",    "Negative",
            "Insight",      "Cause",       "Analytic",    "Clout",       "Authenticity",
            "Tone",         "Sadness",     "Anxiety",     "Social",      "Family",
            "Friend",       "Female",      "Male",        "Tentative",   "Certainty",
            "Differ",       "Percept",     "See",         "Hear",        "Feel",
            "Body",         "Health",      "Sexual",      "Ingest",      "Affiliation",
            "Achievement",  "Power",       "Reward",      "Risk",        "FocusPast",
            "FocusPresent", "FocusFuture", "Motion",      "Space",       "Time",
            "Work",         "Leisure",     "Money",
        },
        "default");
}

ScoreManifest ScoreManifest::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpecError(std::string("manifest JSON parse error: ") + e.what());
    }
    std::vector<std::string> scores;
    std::string version = "file";
    const nlohmann::json* list = &j;
    if (j.is_object()) {
        if (j.contains("version")) version = j.at("version").get<std::string>();
        if (!j.contains("scores")) throw InvalidSpecError("manifest object lacks 'scores'");
        list = &j.at("scores");
    }
    if (!list->is_array()) throw InvalidSpecError("manifest must be a JSON array of names");
    for (const auto& item : *list) {
        if (!item.is_string()) throw InvalidSpecError("manifest entries must be strings");
        scores.push_back(item.get<std::string>());
    }
    return ScoreManifest(std::move(scores), std::move(version));
}

ScoreManifest ScoreManifest::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpecError("cannot open manifest file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::size_t ScoreManifest::flat_index(int act, std::size_t score_idx) const {
    return static_cast<std::size_t>(act - 1) * scores_.size() + score_idx;
}

std::optional<std::size_t> ScoreManifest::score_index(std::string_view name) const {
    for (std::size_t i = 0; i < scores_.size(); ++i)
        if (scores_[i] == name) return i;
    return std::nullopt;
}

std::string ScoreManifest::column_name(int act, std::size_t score_idx) const {
    return "act" + std::to_string(act) + "_" + scores_[score_idx];
}

std::vector<std::string> ScoreManifest::column_names() const {
    std::vector<std::string> names;
    names.reserve(nlp_dim());
    for (int act = 1; act <= kActs; ++act)
        for (std::size_t s = 0; s < scores_.size(); ++s) names.push_back(column_name(act, s));
    return names;
}

}  // namespace viewcast
