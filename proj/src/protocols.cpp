#include "viewcast/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "viewcast/csv.hpp"
#include "viewcast/errors.hpp"

namespace viewcast {

namespace {

double to_viewers(double raw_prediction, TargetKind kind, double prev_viewers) {
    if (kind == TargetKind::Level) return raw_prediction;
    return prev_viewers * (1.0 + raw_prediction);
}

Metrics series_metrics(const ForecastSeries& series) {
    std::vector<double> pred, actual;
    pred.reserve(series.points.size());
    actual.reserve(series.points.size());
    for (const auto& p : series.points) {
        pred.push_back(p.predicted);
        actual.push_back(p.actual);
    }
    if (pred.empty()) return Metrics{};
    return evaluate(pred, actual);
}

// Chronological split sizes computed on the conceptual lag-aligned row count
// (episodes - 1), so warm-up drops land in the train slice without shrinking
// the test slice.
std::size_t test_row_count(std::size_t n_episodes, double test_fraction) {
    const std::size_t concept_rows = n_episodes - 1;
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * double(concept_rows)));
    return std::clamp<std::size_t>(n_test, 1, concept_rows - 1);
}

struct StageOneFit {
    FeatureFrame frame;  // winsorized, full show
    std::size_t n_train_rows = 0;
    std::size_t boundary_air_index = 0;  // first test target (0-based air index)
    TreeEnsemble stage1;
    std::vector<std::pair<std::string, double>> top_features;
};

StageOneFit fit_stage_one(const EpisodeCorpus& corpus, const std::string& show_id,
                          const GenreMap& genre_map, const SelectionParams& params,
                          std::size_t top_k) {
    const auto& episodes = corpus.air_order(show_id);
    const std::size_t n = episodes.size();
    if (n < 10) throw TooFewEpisodesError(show_id, n, 10);

    FeatureConfig cfg = params.features;
    const auto winsor = cfg.winsor;
    cfg.winsor.reset();  // applied after the split below

    StageOneFit fit;
    fit.frame = assemble_design(corpus.manifest(), genre_map, episodes, cfg);

    const std::size_t n_test = test_row_count(n, params.test_fraction);
    fit.boundary_air_index = n - n_test;

    std::size_t n_train = 0;
    while (n_train < fit.frame.nrows() &&
           fit.frame.rows[n_train].target_air_index < fit.boundary_air_index)
        ++n_train;
    fit.n_train_rows = n_train;
    if (n_train == 0) throw TooFewEpisodesError(show_id, n, 10);

    if (winsor) winsorize_frame(fit.frame, n_train, *winsor);

    FeatureFrame train = fit.frame.slice_rows(0, n_train);
    fit.stage1 = viewcast::train(train, params.boost);

    auto ranked = fit.stage1.gain_importance();
    const std::size_t k = std::min(top_k, ranked.size());
    fit.top_features.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
    return fit;
}

// One rolling step: assemble the design over the first `prefix` episodes,
// optionally restrict columns, winsorize on the training rows, and return
// the train slice plus the prediction row (which targets prefix-1).
struct RollingStep {
    FeatureFrame frame;
    std::size_t n_train_rows = 0;
    bool prediction_row_defined = false;
};

RollingStep make_rolling_step(const EpisodeCorpus& corpus, std::span<const EpisodeRecord> episodes,
                              std::size_t prefix, const GenreMap& genre_map,
                              const FeatureConfig& config,
                              const std::optional<WinsorLimits>& winsor,
                              const std::vector<std::string>* whitelist) {
    RollingStep step;
    step.frame =
        assemble_design(corpus.manifest(), genre_map, episodes.subspan(0, prefix), config);
    if (whitelist) {
        std::vector<std::string> keep;
        for (const auto& name : *whitelist)
            if (step.frame.column_index(name)) keep.push_back(name);
        step.frame = step.frame.select_columns(keep);
    }
    if (step.frame.nrows() == 0) return step;

    const auto& last = step.frame.rows[step.frame.nrows() - 1];
    step.prediction_row_defined = last.target_air_index == prefix - 1;
    step.n_train_rows =
        step.prediction_row_defined ? step.frame.nrows() - 1 : step.frame.nrows();
    if (winsor) winsorize_frame(step.frame, step.n_train_rows, *winsor);
    return step;
}

ForecastSeries run_rolling_loop(const EpisodeCorpus& corpus, const std::string& show_id,
                                const GenreMap& genre_map, const FeatureConfig& features,
                                const BoostParams& boost, int retrain_every,
                                std::size_t first_target_index,
                                const std::vector<std::string>* whitelist,
                                const std::string& protocol_name) {
    const auto& episodes = corpus.air_order(show_id);
    const std::size_t n = episodes.size();

    FeatureConfig cfg = features;
    const auto winsor = cfg.winsor;
    cfg.winsor.reset();

    ForecastSeries series;
    series.show_id = show_id;
    series.protocol = protocol_name;

    TreeEnsemble model;
    bool have_model = false;
    std::size_t last_fit_target = 0;

    for (std::size_t target = first_target_index; target < n; ++target) {
        RollingStep step = make_rolling_step(corpus, episodes, target + 1, genre_map, cfg, winsor,
                                             whitelist);
        if (!step.prediction_row_defined || step.n_train_rows < 1) continue;

        const bool stale_ok = have_model && model.columns() == step.frame.columns &&
                              target - last_fit_target <
                                  static_cast<std::size_t>(std::max(1, retrain_every));
        if (!stale_ok) {
            model = train(step.frame.slice_rows(0, step.n_train_rows), boost);
            have_model = true;
            last_fit_target = target;
        }

        const std::size_t pred_row = step.frame.nrows() - 1;
        const double raw = model.predict(step.frame.row(pred_row));
        const auto& prov = step.frame.rows[pred_row];
        series.points.push_back({prov.target_season, prov.target_episode, prov.target_air_date,
                                 to_viewers(raw, cfg.target, prov.prev_viewers),
                                 prov.actual_viewers});
    }

    series.metrics = series_metrics(series);
    return series;
}

}  // namespace

Metrics evaluate(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size())
        throw InvalidSpecError("evaluate: prediction/actual length mismatch");
    if (actual.empty()) throw EmptyColumnError("evaluate on an empty pair list");

    Metrics m;
    m.n = actual.size();
    double ssres = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = predicted[i] - actual[i];
        ssres += e * e;
    }
    m.rmse = std::sqrt(ssres / static_cast<double>(actual.size()));

    if (actual.size() < 2) return m;  // degenerate: r2 undefined
    const double mean =
        std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
    double sstot = 0.0;
    for (double a : actual) sstot += (a - mean) * (a - mean);
    if (sstot == 0.0) return m;  // degenerate: actuals all equal
    m.r2 = 1.0 - ssres / sstot;
    return m;
}

ForecastSeries rolling_forecast(const EpisodeCorpus& corpus, const std::string& show_id,
                                const GenreMap& genre_map, const RollingParams& params) {
    const std::size_t n = corpus.air_order(show_id).size();
    if (n < 3) throw TooFewEpisodesError(show_id, n, 3);
    return run_rolling_loop(corpus, show_id, genre_map, params.features, params.boost,
                            params.retrain_every, 2, nullptr, "rolling");
}

SelectionResult selection_forecast(const EpisodeCorpus& corpus, const std::string& show_id,
                                   const GenreMap& genre_map, const SelectionParams& params) {
    StageOneFit fit = fit_stage_one(corpus, show_id, genre_map, params,
                                    static_cast<std::size_t>(params.top_k));

    SelectionResult result;
    result.stage1 = std::move(fit.stage1);
    result.top_features = fit.top_features;
    result.train_rows = fit.n_train_rows;
    result.test_rows = fit.frame.nrows() - fit.n_train_rows;

    std::vector<std::string> keep;
    keep.reserve(result.top_features.size());
    for (const auto& [name, _] : result.top_features) keep.push_back(name);

    FeatureFrame train = fit.frame.slice_rows(0, fit.n_train_rows).select_columns(keep);
    result.stage2 = train(train, params.boost);

    FeatureFrame test = fit.frame.slice_rows(fit.n_train_rows, fit.frame.nrows());
    std::vector<double> raw = result.stage2.predict_frame(test);

    result.series.show_id = show_id;
    result.series.protocol = "selection";
    for (std::size_t r = 0; r < test.nrows(); ++r) {
        const auto& prov = test.rows[r];
        result.series.points.push_back(
            {prov.target_season, prov.target_episode, prov.target_air_date,
             to_viewers(raw[r], params.features.target, prov.prev_viewers),
             prov.actual_viewers});
    }
    result.series.metrics = series_metrics(result.series);
    result.shap = shap_summary(result.stage2, fit.frame, params.shap_exclude);
    return result;
}

ForecastSeries combined_forecast(const EpisodeCorpus& corpus, const std::string& show_id,
                                 const GenreMap& genre_map, const CombinedParams& params) {
    const std::size_t n = corpus.air_order(show_id).size();
    if (n < 3) throw TooFewEpisodesError(show_id, n, 3);

    StageOneFit fit = fit_stage_one(corpus, show_id, genre_map, params.selection,
                                    static_cast<std::size_t>(params.top_k));
    std::vector<std::string> whitelist;
    whitelist.reserve(fit.top_features.size());
    for (const auto& [name, _] : fit.top_features) whitelist.push_back(name);

    // Engineered columns outside the frozen list are not computed at all, so
    // their warm-up windows cannot drop rows.
    FeatureConfig cfg = params.selection.features;
    auto has = [&](const std::string& name) {
        return std::find(whitelist.begin(), whitelist.end(), name) != whitelist.end();
    };
    cfg.include_prev_viewership = cfg.include_prev_viewership && has("prev_viewership");
    cfg.include_gap_days = cfg.include_gap_days && has("gap_days");
    std::vector<int> windows;
    for (int w : cfg.ma_windows)
        if (has("ma" + std::to_string(w) + "_viewership")) windows.push_back(w);
    cfg.ma_windows = std::move(windows);

    // Forecast the post-split targets: the frozen list never previews any
    // episode it is later asked to predict.
    const std::size_t first_target = std::max<std::size_t>(2, fit.boundary_air_index);
    return run_rolling_loop(corpus, show_id, genre_map, cfg, params.boost, params.retrain_every,
                            first_target, &whitelist, "combined");
}

ForecastSeries persistence_baseline(const EpisodeCorpus& corpus, const std::string& show_id) {
    const auto& episodes = corpus.air_order(show_id);
    const std::size_t n = episodes.size();
    if (n < 2) throw TooFewEpisodesError(show_id, n, 2);

    ForecastSeries series;
    series.show_id = show_id;
    series.protocol = "persistence";
    for (std::size_t i = 2; i < n; ++i) {
        const auto& ep = episodes[i];
        series.points.push_back({ep.season, ep.episode, ep.air_date,
                                 episodes[i - 1].viewers_millions, ep.viewers_millions});
    }
    series.metrics = series_metrics(series);
    return series;
}

ForecastSeries arx_baseline(const EpisodeCorpus& corpus, const std::string& show_id,
                            const ArxParams& params) {
    const auto& episodes = corpus.air_order(show_id);
    const std::size_t n = episodes.size();
    const auto p = static_cast<std::size_t>(params.lag_order);
    if (params.lag_order < 1) throw InvalidSpecError("ARX lag order must be >= 1");
    if (n < p + 3) throw TooFewEpisodesError(show_id, n, p + 3);

    std::vector<double> v(n), gap(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i] = episodes[i].viewers_millions;
    for (std::size_t i = 1; i < n; ++i)
        gap[i] = double(episodes[i].air_date.serial() - episodes[i - 1].air_date.serial());

    const std::size_t k = p + (params.include_gap ? 1 : 0) + 1;  // lags + gap + intercept

    ForecastSeries series;
    series.show_id = show_id;
    series.protocol = "arx";
    for (std::size_t target = 2; target < n; ++target) {
        // Training samples t with p lags available, strictly before the target.
        std::vector<std::size_t> samples;
        for (std::size_t t = p; t < target; ++t) samples.push_back(t);

        Eigen::VectorXd coef = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
        if (!samples.empty()) {
            Eigen::MatrixXd a(samples.size(), k);
            Eigen::VectorXd b(samples.size());
            for (std::size_t row = 0; row < samples.size(); ++row) {
                const std::size_t t = samples[row];
                for (std::size_t lag = 0; lag < p; ++lag)
                    a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(lag)) =
                        v[t - 1 - lag];
                std::size_t c = p;
                if (params.include_gap) a(static_cast<Eigen::Index>(row), c++) = gap[t];
                a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) = 1.0;
                b(static_cast<Eigen::Index>(row)) = v[t];
            }
            coef = a.completeOrthogonalDecomposition().solve(b);
        }

        double pred = 0.0;
        for (std::size_t lag = 0; lag < p; ++lag)
            pred += coef(static_cast<Eigen::Index>(lag)) * v[target - 1 - lag];
        std::size_t c = p;
        if (params.include_gap) pred += coef(static_cast<Eigen::Index>(c++)) * gap[target];
        pred += coef(static_cast<Eigen::Index>(c));

        const auto& ep = episodes[target];
        series.points.push_back({ep.season, ep.episode, ep.air_date, pred, ep.viewers_millions});
    }
    series.metrics = series_metrics(series);
    return series;
}

std::string forecast_series_csv(const ForecastSeries& series) {
    std::string out = "show_id,protocol,season,episode,air_date,predicted,actual\n";
    for (const auto& pt : series.points) {
        out += csv_join({series.show_id, series.protocol, std::to_string(pt.season),
                         std::to_string(pt.episode), pt.air_date.to_string(),
                         format_double(pt.predicted), format_double(pt.actual)});
        out.push_back('\n');
    }
    return out;
}

std::string metrics_csv_header() { return "show_id,protocol,rmse,r2,n\n"; }

std::string metrics_csv_row(const std::string& show_id, const std::string& protocol,
                            const Metrics& metrics) {
    return csv_join({show_id, protocol, format_double(metrics.rmse),
                     metrics.r2 ? format_double(*metrics.r2) : "",
                     std::to_string(metrics.n)}) +
           "\n";
}

}  // namespace viewcast
