#ifndef VIEWCAST_PROTOCOLS_HPP
#define VIEWCAST_PROTOCOLS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viewcast/boosting.hpp"
#include "viewcast/corpus.hpp"
#include "viewcast/preprocess.hpp"
#include "viewcast/shap.hpp"

namespace viewcast {

struct Metrics {
    double rmse = 0.0;
    std::optional<double> r2;  // undefined for degenerate evaluation sets
    std::size_t n = 0;
};

/// RMSE and R^2 = 1 - SSres/SStot about the mean of the evaluated actuals
/// (negative when predictions underperform that mean). R^2 is left undefined
/// when n < 2 or the actuals are all equal.
Metrics evaluate(std::span<const double> predicted, std::span<const double> actual);

struct ForecastPoint {
    int season = 0;
    int episode = 0;
    Date air_date;
    double predicted = 0.0;
    double actual = 0.0;
};

struct ForecastSeries {
    std::string show_id;
    std::string protocol;
    std::vector<ForecastPoint> points;  // air order
    Metrics metrics;
};

struct RollingParams {
    FeatureConfig features = FeatureConfig::rolling_defaults();
    BoostParams boost;
    int retrain_every = 1;  // refit cadence; stale model reused between refits
};

struct SelectionParams {
    FeatureConfig features = FeatureConfig::selection_defaults();
    BoostParams boost;
    int top_k = 20;
    double test_fraction = 0.2;
    std::vector<std::string> shap_exclude;  // ranking-only exclusions
};

struct CombinedParams {
    SelectionParams selection;  // stage-1 fit that freezes the feature list
    BoostParams boost;
    int top_k = 10;
    int retrain_every = 1;
};

struct ArxParams {
    int lag_order = 1;
    bool include_gap = true;
};

struct SelectionResult {
    TreeEnsemble stage1;
    std::vector<std::pair<std::string, double>> top_features;  // stage-1 gain, descending
    TreeEnsemble stage2;
    ForecastSeries series;  // chronological test slice
    ShapSummary shap;       // stage-2 attributions over the show's full frame
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

/// Sequentially retrained forecaster: for each target from the third aired
/// episode on, trains on lag-aligned rows built solely from earlier episodes
/// and predicts the target. Temporal columns stay excluded by default.
ForecastSeries rolling_forecast(const EpisodeCorpus& corpus, const std::string& show_id,
                                const GenreMap& genre_map, const RollingParams& params = {});

/// Nested fit: chronological 80/20 split, stage-1 on the train slice with all
/// features, top-k by gain, stage-2 restricted to those, test-slice forecast.
SelectionResult selection_forecast(const EpisodeCorpus& corpus, const std::string& show_id,
                                   const GenreMap& genre_map, const SelectionParams& params = {});

/// Rolling protocol restricted to the stage-1 top-k features, frozen from
/// the train slice; forecasts the post-split targets so no prediction leans
/// on data at or after its own episode.
ForecastSeries combined_forecast(const EpisodeCorpus& corpus, const std::string& show_id,
                                 const GenreMap& genre_map, const CombinedParams& params = {});

/// Predicts each episode's viewership as the previous episode's, evaluated
/// over the rolling protocol's target window.
ForecastSeries persistence_baseline(const EpisodeCorpus& corpus, const std::string& show_id);

/// Least-squares AR(p) with the air gap as exogenous regressor, refit per
/// target over the rolling window; rank-deficient fits take the minimum-norm
/// solution.
ForecastSeries arx_baseline(const EpisodeCorpus& corpus, const std::string& show_id,
                            const ArxParams& params = {});

/// CSV exports (External wire formats).
std::string forecast_series_csv(const ForecastSeries& series);
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& show_id, const std::string& protocol,
                            const Metrics& metrics);

}  // namespace viewcast

#endif
