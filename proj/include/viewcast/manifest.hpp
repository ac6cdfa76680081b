#ifndef VIEWCAST_MANIFEST_HPP
#define VIEWCAST_MANIFEST_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace viewcast {

inline constexpr int kActs = 3;

/// Ordered list of per-act NLP score names. The full per-episode NLP
/// dimensionality is 3 x manifest length (one value per narrative act).
class ScoreManifest {
public:
    ScoreManifest() = default;
    ScoreManifest(std::vector<std::string> scores, std::string version);

    /// The 43-score manifest shipped with the library.
    static ScoreManifest builtin_default();

    /// Loads a JSON array of names, or {"version": ..., "scores": [...]}.
    static ScoreManifest from_json_text(const std::string& text);
    static ScoreManifest load_file(const std::string& path);

    const std::vector<std::string>& scores() const { return scores_; }
    const std::string& version() const { return version_; }
    std::size_t score_count() const { return scores_.size(); }
    std::size_t nlp_dim() const { return scores_.size() * kActs; }

    /// Flat index of (act in 1..3, score index), act-major.
    std::size_t flat_index(int act, std::size_t score_idx) const;
    std::optional<std::size_t> score_index(std::string_view name) const;

    /// Column name for one cell: act{k}_{score}.
    std::string column_name(int act, std::size_t score_idx) const;

    /// All 129 column names, acts outer, manifest order inner.
    std::vector<std::string> column_names() const;

    bool operator==(const ScoreManifest&) const = default;

private:
    void check() const;

    std::vector<std::string> scores_;
    std::string version_ = "default";
};

}  // namespace viewcast

#endif
