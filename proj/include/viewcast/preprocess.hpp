#ifndef VIEWCAST_PREPROCESS_HPP
#define VIEWCAST_PREPROCESS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viewcast/corpus.hpp"

namespace viewcast {

/// Raw genre label -> coarse classification, total via fallback.
class GenreMap {
public:
    GenreMap() = default;
    GenreMap(std::map<std::string, std::string> mapping, std::string fallback);

    /// The 54 -> 14 mapping shipped with the library.
    static GenreMap builtin_default();

    /// JSON object of raw -> coarse pairs plus a "_fallback" key.
    static GenreMap from_json_text(const std::string& text);
    static GenreMap load_file(const std::string& path);

    const std::string& collapse(const std::string& raw) const;
    const std::map<std::string, std::string>& mapping() const { return mapping_; }
    const std::string& fallback() const { return fallback_; }

private:
    std::map<std::string, std::string> mapping_;
    std::string fallback_ = "Other";
};

enum class SeasonOfYear { Winter = 0, Spring = 1, Summer = 2, Fall = 3 };
enum class EpisodePosition { Mid, Premiere, Finale };

struct TemporalFeatures {
    int month = 1;                 // 1..12
    int year = 1970;
    int year_month = 197001;       // year*100 + month
    int day_of_week = 0;           // 0=Monday .. 6=Sunday
    SeasonOfYear season_of_year = SeasonOfYear::Winter;
    int year_season = 19700;       // year*10 + quarter index
    EpisodePosition position = EpisodePosition::Mid;
};

/// Calendar features plus the premiere/finale flag derived from the
/// episode's position within its season's [min_episode, max_episode].
TemporalFeatures temporal_features(const Date& air_date, int episode, int season_min_episode,
                                   int season_max_episode);

/// One-hot expansion of a label column: one 0/1 column per distinct label,
/// labels sorted; each row sums to exactly 1.
struct OneHot {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> columns;  // columns[label][row]
};
OneHot one_hot(const std::vector<std::string>& values);

/// Percentage change, first entry undefined. A zero prior marks the entry
/// undefined and flags its index for row exclusion.
struct PctChangeSeries {
    std::vector<std::optional<double>> values;
    std::vector<std::size_t> flagged;  // indices with zero prior
};
PctChangeSeries pct_change(std::span<const double> series);

/// Trailing mean over `window` values; undefined until the window fills.
std::vector<std::optional<double>> moving_average(std::span<const double> series, int window);

/// Percentile clip bounds for one column, linear interpolation between
/// order statistics. Fit on training rows only.
struct ColumnClip {
    double lower = 0.0;
    double upper = 0.0;
};
ColumnClip winsorize_fit(std::span<const double> train_column, double lower_pct, double upper_pct);
std::vector<double> winsorize_apply(std::span<const double> column, const ColumnClip& clip);

/// Linear-interpolation percentile (rank = p/100 * (n-1)) of unsorted data.
double percentile_linear(std::span<const double> values, double pct);

struct WinsorLimits {
    double lower_pct = 1.0;
    double upper_pct = 99.0;
};

enum class TargetKind { Level, PctChange };

/// Flags selecting which engineered/temporal columns a design matrix carries.
struct FeatureConfig {
    bool include_temporal = false;        // calendar + season/episode numbers + position
    bool include_gap_days = false;        // air gap preceding the target episode
    bool include_prev_viewership = true;  // viewership of the feature episode
    std::vector<int> ma_windows;          // trailing viewership means, e.g. {3, 5}
    TargetKind target = TargetKind::Level;
    std::optional<WinsorLimits> winsor;

    static FeatureConfig rolling_defaults();
    static FeatureConfig selection_defaults();

    std::string to_json_text() const;
    static FeatureConfig from_json_text(const std::string& text);
};

/// Supervised design matrix: features observable at episode t, target at
/// t+1, one row per target episode. No NaN/Inf cells.
struct FeatureFrame {
    struct Provenance {
        std::string show_id;
        int target_season = 0;
        int target_episode = 0;
        Date target_air_date;
        std::size_t target_air_index = 0;  // 0-based position in the show's air order
        double prev_viewers = 0.0;         // viewership of the feature episode t
        double actual_viewers = 0.0;       // raw viewership of the target episode
    };

    std::vector<std::string> columns;
    std::vector<std::uint8_t> indicators;  // per column: 0/1 one-hot flag
    std::vector<double> data;              // row-major
    std::vector<double> target;
    std::string target_name;
    std::vector<Provenance> rows;
    std::size_t dropped_rows = 0;  // rows excluded for undefined cells

    std::size_t nrows() const { return rows.size(); }
    std::size_t ncols() const { return columns.size(); }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * ncols(), ncols()};
    }
    double cell(std::size_t r, std::size_t c) const { return data[r * ncols() + c]; }
    std::optional<std::size_t> column_index(std::string_view name) const;

    FeatureFrame slice_rows(std::size_t begin, std::size_t end) const;
    FeatureFrame select_columns(const std::vector<std::string>& keep) const;
};

struct WinsorStats {
    WinsorLimits limits;
    std::map<std::string, ColumnClip> feature_clips;  // indicator columns excluded
    std::optional<ColumnClip> target_clip;
};

/// Fits clips on the first `fit_rows` rows of every non-indicator column
/// plus the target, then clips features on all rows and the target on the
/// fit range only (later targets stay raw for evaluation). No-op when
/// fit_rows is 0.
WinsorStats winsorize_frame(FeatureFrame& frame, std::size_t fit_rows,
                            const WinsorLimits& limits);

/// Core lag alignment over one show's episodes in air order: NLP scores,
/// numeric metadata, and engineered lags from episode t paired with the
/// target at t+1. Categorical encoding and temporal columns are added by
/// assemble_design.
FeatureFrame lag_align(const ScoreManifest& manifest, std::span<const EpisodeRecord> episodes,
                       const FeatureConfig& config);

/// Full design assembly for a span of one show's episodes (air order):
/// genre collapse + one-hot, network one-hot, temporal features, engineered
/// lags, then winsorization fitted on the first `winsor_fit_rows` rows
/// (0 = fit on all rows). Columns are in a stable documented order.
FeatureFrame assemble_design(const ScoreManifest& manifest, const GenreMap& genre_map,
                             std::span<const EpisodeRecord> episodes, const FeatureConfig& config,
                             std::size_t winsor_fit_rows = 0, WinsorStats* stats_out = nullptr);

FeatureFrame assemble_design(const EpisodeCorpus& corpus, const std::string& show_id,
                             const GenreMap& genre_map, const FeatureConfig& config,
                             std::size_t winsor_fit_rows = 0, WinsorStats* stats_out = nullptr);

}  // namespace viewcast

#endif
