#ifndef VIEWCAST_CORPUS_HPP
#define VIEWCAST_CORPUS_HPP

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "viewcast/date.hpp"
#include "viewcast/manifest.hpp"

namespace viewcast {

/// One episode: metadata, viewership, and the 129 act-level NLP scores.
struct EpisodeRecord {
    std::string show_id;
    std::string show_title;
    int season = 1;
    int episode = 1;
    Date air_date;
    std::optional<double> length_minutes;
    std::optional<double> imdb_rating;
    std::string genre;    // raw label, pre-collapse
    std::string network;
    double viewers_millions = 0.0;
    std::optional<bool> canceled;
    std::vector<double> nlp;  // act-major, manifest order; size = manifest.nlp_dim()

    double nlp_at(const ScoreManifest& m, int act, std::size_t score_idx) const {
        return nlp[m.flat_index(act, score_idx)];
    }

    bool operator==(const EpisodeRecord&) const = default;
};

/// Immutable episode collection, grouped by show, each show in air order
/// (air_date ascending, ties by season then episode).
class EpisodeCorpus {
public:
    static EpisodeCorpus build(ScoreManifest manifest, std::vector<EpisodeRecord> episodes);

    const ScoreManifest& manifest() const { return manifest_; }
    std::size_t show_count() const { return shows_.size(); }
    std::size_t total_episodes() const;
    bool has_show(const std::string& show_id) const;

    /// Sorted show ids.
    std::vector<std::string> show_ids() const;

    /// Episodes of one show in air order. Throws UnknownShowError.
    const std::vector<EpisodeRecord>& air_order(const std::string& show_id) const;

    bool operator==(const EpisodeCorpus&) const = default;

private:
    ScoreManifest manifest_;
    std::vector<std::vector<EpisodeRecord>> shows_;  // sorted by show_id, episodes in air order
    std::map<std::string, std::size_t> index_;
};

struct ValidationReport {
    struct ShowSummary {
        std::string show_id;
        std::size_t episode_count = 0;
        Date first_air;
        Date last_air;
    };
    struct NonFiniteCell {
        std::string show_id;
        int season = 0;
        int episode = 0;
        std::string column;
    };

    std::vector<ShowSummary> shows;
    std::vector<std::string> below_rolling_minimum;  // shows with < 3 episodes
    std::vector<NonFiniteCell> nonfinite_cells;
    std::size_t total_episodes = 0;

    bool clean() const { return below_rolling_minimum.empty() && nonfinite_cells.empty(); }
    std::string to_json_text() const;
};

/// Exact header the corpus CSV must carry, derived from the manifest.
std::vector<std::string> corpus_header(const ScoreManifest& manifest);

/// Parses the corpus CSV. Throws MissingColumnError / BadCellError /
/// DuplicateEpisodeError on schema violations.
EpisodeCorpus parse_corpus(std::istream& in, const ScoreManifest& manifest);
EpisodeCorpus parse_corpus_file(const std::string& path, const ScoreManifest& manifest);

/// Writes the corpus back out in canonical order (show id, then air order).
/// Field values survive a parse round-trip bit-identically.
void write_corpus_csv(const EpisodeCorpus& corpus, std::ostream& out);

ValidationReport validate_corpus(const EpisodeCorpus& corpus);

}  // namespace viewcast

#endif
