#include "viewcast/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "viewcast/csv.hpp"
#include "viewcast/errors.hpp"

namespace viewcast {

namespace {

constexpr std::size_t kMetaColumns = 11;

const char* kMetaHeader[kMetaColumns] = {
    "show_id", "show_title", "season",  "episode",          "air_date", "length_minutes",
    "imdb_rating", "genre",  "network", "viewers_millions", "canceled",
};

bool air_before(const EpisodeRecord& a, const EpisodeRecord& b) {
    if (a.air_date != b.air_date) return a.air_date < b.air_date;
    if (a.season != b.season) return a.season < b.season;
    return a.episode < b.episode;
}

std::optional<bool> parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    return std::nullopt;
}

}  // namespace

EpisodeCorpus EpisodeCorpus::build(ScoreManifest manifest, std::vector<EpisodeRecord> episodes) {
    EpisodeCorpus corpus;
    corpus.manifest_ = std::move(manifest);

    std::set<std::tuple<std::string, int, int>> keys;
    for (const auto& ep : episodes) {
        if (!keys.insert({ep.show_id, ep.season, ep.episode}).second)
            throw DuplicateEpisodeError(ep.show_id, ep.season, ep.episode);
        if (ep.nlp.size() != corpus.manifest_.nlp_dim())
            throw InvalidSpecError("episode NLP vector has " + std::to_string(ep.nlp.size()) +
                                   " cells, manifest expects " +
                                   std::to_string(corpus.manifest_.nlp_dim()));
    }

    std::map<std::string, std::vector<EpisodeRecord>> grouped;
    for (auto& ep : episodes) grouped[ep.show_id].push_back(std::move(ep));

    for (auto& [show_id, eps] : grouped) {
        std::sort(eps.begin(), eps.end(), air_before);
        corpus.index_[show_id] = corpus.shows_.size();
        corpus.shows_.push_back(std::move(eps));
    }
    return corpus;
}

std::size_t EpisodeCorpus::total_episodes() const {
    std::size_t n = 0;
    for (const auto& s : shows_) n += s.size();
    return n;
}

bool EpisodeCorpus::has_show(const std::string& show_id) const {
    return index_.count(show_id) != 0;
}

std::vector<std::string> EpisodeCorpus::show_ids() const {
    std::vector<std::string> ids;
    ids.reserve(index_.size());
    for (const auto& [id, _] : index_) ids.push_back(id);
    return ids;
}

const std::vector<EpisodeRecord>& EpisodeCorpus::air_order(const std::string& show_id) const {
    auto it = index_.find(show_id);
    if (it == index_.end()) throw UnknownShowError(show_id);
    return shows_[it->second];
}

std::vector<std::string> corpus_header(const ScoreManifest& manifest) {
    std::vector<std::string> header(kMetaHeader, kMetaHeader + kMetaColumns);
    for (const auto& name : manifest.column_names()) header.push_back(name);
    return header;
}

EpisodeCorpus parse_corpus(std::istream& in, const ScoreManifest& manifest) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw MissingColumnError("show_id", "input is empty, no header row");

    const auto expected = corpus_header(manifest);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i >= fields.size())
            throw MissingColumnError(expected[i], "header ends at column " + std::to_string(i));
        if (fields[i] != expected[i])
            throw MissingColumnError(expected[i], "found '" + fields[i] + "' at position " +
                                                      std::to_string(i));
    }
    if (fields.size() > expected.size())
        throw MissingColumnError(fields[expected.size()], "unexpected extra column");

    std::vector<EpisodeRecord> episodes;
    while (reader.next(fields)) {
        const std::size_t row = reader.record_number();
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        if (fields.size() != expected.size())
            throw BadCellError(row, "", "expected " + std::to_string(expected.size()) +
                                            " fields, got " + std::to_string(fields.size()));

        EpisodeRecord ep;
        ep.show_id = fields[0];
        if (ep.show_id.empty()) throw BadCellError(row, "show_id", "empty value");
        ep.show_title = fields[1];

        auto season = parse_int(fields[2]);
        if (!season || *season < 1) throw BadCellError(row, "season", "not an integer >= 1");
        ep.season = static_cast<int>(*season);

        auto episode = parse_int(fields[3]);
        if (!episode || *episode < 1) throw BadCellError(row, "episode", "not an integer >= 1");
        ep.episode = static_cast<int>(*episode);

        auto date = Date::parse(fields[4]);
        if (!date) throw BadCellError(row, "air_date", "not an ISO-8601 date");
        ep.air_date = *date;

        if (!fields[5].empty()) {
            auto v = parse_double(fields[5]);
            if (!v || !std::isfinite(*v) || *v < 0)
                throw BadCellError(row, "length_minutes", "not a nonnegative real");
            ep.length_minutes = *v;
        }
        if (!fields[6].empty()) {
            auto v = parse_double(fields[6]);
            if (!v || !std::isfinite(*v) || *v < 0 || *v > 10)
                throw BadCellError(row, "imdb_rating", "not a real in [0,10]");
            ep.imdb_rating = *v;
        }
        ep.genre = fields[7];
        ep.network = fields[8];

        auto viewers = parse_double(fields[9]);
        if (!viewers || !std::isfinite(*viewers) || *viewers < 0)
            throw BadCellError(row, "viewers_millions", "not a nonnegative real");
        ep.viewers_millions = *viewers;

        if (!fields[10].empty()) {
            auto b = parse_bool(fields[10]);
            if (!b) throw BadCellError(row, "canceled", "not a boolean");
            ep.canceled = *b;
        }

        // NLP cells must all be present; non-finite values parse and are
        // surfaced by validate_corpus rather than silently repaired.
        ep.nlp.reserve(manifest.nlp_dim());
        for (std::size_t i = 0; i < manifest.nlp_dim(); ++i) {
            const std::string& cell = fields[kMetaColumns + i];
            if (cell.empty())
                throw BadCellError(row, expected[kMetaColumns + i], "missing NLP score");
            auto v = parse_double(cell);
            if (!v) throw BadCellError(row, expected[kMetaColumns + i], "not a real");
            ep.nlp.push_back(*v);
        }
        episodes.push_back(std::move(ep));
    }
    return EpisodeCorpus::build(manifest, std::move(episodes));
}

EpisodeCorpus parse_corpus_file(const std::string& path, const ScoreManifest& manifest) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidSpecError("cannot open corpus file '" + path + "'");
    return parse_corpus(in, manifest);
}

void write_corpus_csv(const EpisodeCorpus& corpus, std::ostream& out) {
    out << csv_join(corpus_header(corpus.manifest())) << "\n";
    for (const auto& show_id : corpus.show_ids()) {
        for (const auto& ep : corpus.air_order(show_id)) {
            std::vector<std::string> fields;
            fields.reserve(kMetaColumns + ep.nlp.size());
            fields.push_back(ep.show_id);
            fields.push_back(ep.show_title);
            fields.push_back(std::to_string(ep.season));
            fields.push_back(std::to_string(ep.episode));
            fields.push_back(ep.air_date.to_string());
            fields.push_back(ep.length_minutes ? format_double(*ep.length_minutes) : "");
            fields.push_back(ep.imdb_rating ? format_double(*ep.imdb_rating) : "");
            fields.push_back(ep.genre);
            fields.push_back(ep.network);
            fields.push_back(format_double(ep.viewers_millions));
            fields.push_back(ep.canceled ? (*ep.canceled ? "true" : "false") : "");
            for (double v : ep.nlp) fields.push_back(format_double(v));
            out << csv_join(fields) << "\n";
        }
    }
}

ValidationReport validate_corpus(const EpisodeCorpus& corpus) {
    ValidationReport report;
    report.total_episodes = corpus.total_episodes();
    const auto& manifest = corpus.manifest();
    const auto nlp_names = manifest.column_names();

    for (const auto& show_id : corpus.show_ids()) {
        const auto& eps = corpus.air_order(show_id);
        ValidationReport::ShowSummary summary;
        summary.show_id = show_id;
        summary.episode_count = eps.size();
        summary.first_air = eps.front().air_date;
        summary.last_air = eps.back().air_date;
        report.shows.push_back(summary);

        if (eps.size() < 3) report.below_rolling_minimum.push_back(show_id);

        for (const auto& ep : eps) {
            for (std::size_t i = 0; i < ep.nlp.size(); ++i) {
                if (!std::isfinite(ep.nlp[i]))
                    report.nonfinite_cells.push_back(
                        {show_id, ep.season, ep.episode, nlp_names[i]});
            }
        }
    }
    return report;
}

std::string ValidationReport::to_json_text() const {
    nlohmann::json j;
    j["total_episodes"] = total_episodes;
    j["show_count"] = shows.size();
    j["clean"] = clean();
    j["shows"] = nlohmann::json::array();
    for (const auto& s : shows) {
        j["shows"].push_back({{"show_id", s.show_id},
                              {"episodes", s.episode_count},
                              {"first_air", s.first_air.to_string()},
                              {"last_air", s.last_air.to_string()}});
    }
    j["below_rolling_minimum"] = below_rolling_minimum;
    j["nonfinite_cells"] = nlohmann::json::array();
    for (const auto& c : nonfinite_cells) {
        j["nonfinite_cells"].push_back({{"show_id", c.show_id},
                                        {"season", c.season},
                                        {"episode", c.episode},
                                        {"column", c.column}});
    }
    return j.dump(2);
}

}  // namespace viewcast
