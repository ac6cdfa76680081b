#include "viewcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include "json.hpp"
#include "viewcast/errors.hpp"

namespace viewcast {

GenreMap::GenreMap(std::map<std::string, std::string> mapping, std::string fallback)
    : mapping_(std::move(mapping)), fallback_(std::move(fallback)) {
    std::set<std::string> coarse;
    for (const auto& [_, c] : mapping_) coarse.insert(c);
    if (coarse.size() > 14)
        throw InvalidSpecError("genre map produces " + std::to_string(coarse.size()) +
                               " coarse labels, limit is 14");
}

GenreMap GenreMap::builtin_default() {
    return GenreMap(
        {
            {"Drama", "Drama"},
            {"Crime Drama", "Drama"},
            {"Legal Drama", "Drama"},
            {"Medical Drama", "Drama"},
            {"Teen Drama", "Drama"},
            {"Political Drama", "Drama"},
            {"Period Drama", "Drama"},
            {"Soap Opera", "Drama"},
            {"Melodrama", "Drama"},
            {"Sitcom", "Comedy"},
            {"Comedy", "Comedy"},
            {"Dark Comedy", "Comedy"},
            {"Romantic Comedy", "Comedy"},
            {"Sketch Comedy", "Comedy"},
            {"Mockumentary", "Comedy"},
            {"Stand-Up", "Comedy"},
            {"Crime", "Crime"},
            {"Police Procedural", "Crime"},
            {"Detective", "Crime"},
            {"Heist", "Crime"},
            {"Science Fiction", "SciFiFantasy"},
            {"Fantasy", "SciFiFantasy"},
            {"Supernatural", "SciFiFantasy"},
            {"Superhero", "SciFiFantasy"},
            {"Space Opera", "SciFiFantasy"},
            {"Action", "ActionAdventure"},
            {"Adventure", "ActionAdventure"},
            {"Thriller", "ActionAdventure"},
            {"Spy", "ActionAdventure"},
            {"Martial Arts", "ActionAdventure"},
            {"Horror", "Horror"},
            {"Slasher", "Horror"},
            {"Psychological Horror", "Horror"},
            {"Reality", "Reality"},
            {"Reality Competition", "Reality"},
            {"Dating Show", "Reality"},
            {"Makeover", "Reality"},
            {"Documentary", "Documentary"},
            {"Docuseries", "Documentary"},
            {"True Crime", "Documentary"},
            {"Nature Documentary", "Documentary"},
            {"News", "NewsTalk"},
            {"Talk Show", "NewsTalk"},
            {"Late Night", "NewsTalk"},
            {"Variety", "Variety"},
            {"Game Show", "GameShow"},
            {"Quiz Show", "GameShow"},
            {"Sports", "Sports"},
            {"Sports Talk", "Sports"},
            {"Animation", "Animation"},
            {"Adult Animation", "Animation"},
            {"Anime", "Animation"},
            {"Kids", "Kids"},
            {"Educational", "Kids"},
        },
        "Other");
}

GenreMap GenreMap::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpecError(std::string("genre map JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw InvalidSpecError("genre map must be a JSON object");
    std::map<std::string, std::string> mapping;
    std::string fallback = "Other";
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_string()) throw InvalidSpecError("genre map values must be strings");
        if (it.key() == "_fallback")
            fallback = it.value().get<std::string>();
        else
            mapping[it.key()] = it.value().get<std::string>();
    }
    return GenreMap(std::move(mapping), std::move(fallback));
}

GenreMap GenreMap::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpecError("cannot open genre map file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

const std::string& GenreMap::collapse(const std::string& raw) const {
    auto it = mapping_.find(raw);
    return it == mapping_.end() ? fallback_ : it->second;
}

TemporalFeatures temporal_features(const Date& air_date, int episode, int season_min_episode,
                                   int season_max_episode) {
    TemporalFeatures tf;
    tf.month = air_date.month;
    tf.year = air_date.year;
    tf.year_month = air_date.year * 100 + air_date.month;
    tf.day_of_week = air_date.day_of_week();
    // Dec/Jan/Feb = winter, then three-month blocks.
    int quarter = (air_date.month % 12) / 3;
    tf.season_of_year = static_cast<SeasonOfYear>(quarter);
    tf.year_season = air_date.year * 10 + quarter;
    if (episode == season_min_episode)
        tf.position = EpisodePosition::Premiere;
    else if (episode == season_max_episode)
        tf.position = EpisodePosition::Finale;
    else
        tf.position = EpisodePosition::Mid;
    return tf;
}

OneHot one_hot(const std::vector<std::string>& values) {
    OneHot out;
    std::set<std::string> distinct(values.begin(), values.end());
    out.labels.assign(distinct.begin(), distinct.end());
    out.columns.assign(out.labels.size(), std::vector<double>(values.size(), 0.0));
    for (std::size_t r = 0; r < values.size(); ++r) {
        auto it = std::lower_bound(out.labels.begin(), out.labels.end(), values[r]);
        out.columns[static_cast<std::size_t>(it - out.labels.begin())][r] = 1.0;
    }
    return out;
}

PctChangeSeries pct_change(std::span<const double> series) {
    PctChangeSeries out;
    out.values.resize(series.size());
    for (std::size_t t = 1; t < series.size(); ++t) {
        if (series[t - 1] == 0.0) {
            out.flagged.push_back(t);
        } else {
            out.values[t] = (series[t] - series[t - 1]) / series[t - 1];
        }
    }
    return out;
}

std::vector<std::optional<double>> moving_average(std::span<const double> series, int window) {
    if (window < 1) throw InvalidSpecError("moving average window must be >= 1");
    std::vector<std::optional<double>> out(series.size());
    const std::size_t w = static_cast<std::size_t>(window);
    for (std::size_t t = 0; t < series.size(); ++t) {
        if (t + 1 < w) continue;
        double sum = 0.0;
        for (std::size_t k = t + 1 - w; k <= t; ++k) sum += series[k];
        out[t] = sum / static_cast<double>(window);
    }
    return out;
}

double percentile_linear(std::span<const double> values, double pct) {
    if (values.empty()) throw EmptyColumnError("percentile of an empty column");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() == 1) return sorted[0];
    double rank = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(rank);
    if (lo >= sorted.size() - 1) return sorted.back();
    double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

ColumnClip winsorize_fit(std::span<const double> train_column, double lower_pct,
                         double upper_pct) {
    if (train_column.empty()) throw EmptyColumnError("winsorize_fit on an empty column");
    if (!(lower_pct >= 0.0 && lower_pct < upper_pct && upper_pct <= 100.0))
        throw InvalidSpecError("winsor limits must satisfy 0 <= lower < upper <= 100");
    return {percentile_linear(train_column, lower_pct), percentile_linear(train_column, upper_pct)};
}

std::vector<double> winsorize_apply(std::span<const double> column, const ColumnClip& clip) {
    std::vector<double> out(column.begin(), column.end());
    for (double& v : out) v = std::clamp(v, clip.lower, clip.upper);
    return out;
}

FeatureConfig FeatureConfig::rolling_defaults() {
    // Temporal data excluded from the sequentially retrained protocol.
    return FeatureConfig{};
}

FeatureConfig FeatureConfig::selection_defaults() {
    FeatureConfig cfg;
    cfg.ma_windows = {3, 5};
    cfg.winsor = WinsorLimits{1.0, 99.0};
    return cfg;
}

std::string FeatureConfig::to_json_text() const {
    nlohmann::json j;
    j["include_temporal"] = include_temporal;
    j["include_gap_days"] = include_gap_days;
    j["include_prev_viewership"] = include_prev_viewership;
    j["ma_windows"] = ma_windows;
    j["target"] = target == TargetKind::Level ? "level" : "pct_change";
    if (winsor)
        j["winsor"] = {{"lower", winsor->lower_pct}, {"upper", winsor->upper_pct}};
    else
        j["winsor"] = nullptr;
    return j.dump();
}

FeatureConfig FeatureConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpecError(std::string("feature config JSON parse error: ") + e.what());
    }
    FeatureConfig cfg;
    cfg.include_temporal = j.value("include_temporal", cfg.include_temporal);
    cfg.include_gap_days = j.value("include_gap_days", cfg.include_gap_days);
    cfg.include_prev_viewership =
        j.value("include_prev_viewership", cfg.include_prev_viewership);
    if (j.contains("ma_windows")) cfg.ma_windows = j.at("ma_windows").get<std::vector<int>>();
    if (j.contains("target")) {
        std::string t = j.at("target").get<std::string>();
        if (t == "level")
            cfg.target = TargetKind::Level;
        else if (t == "pct_change")
            cfg.target = TargetKind::PctChange;
        else
            throw InvalidSpecError("target must be 'level' or 'pct_change'");
    }
    if (j.contains("winsor") && !j.at("winsor").is_null()) {
        cfg.winsor = WinsorLimits{j.at("winsor").value("lower", 1.0),
                                  j.at("winsor").value("upper", 99.0)};
    }
    return cfg;
}

std::optional<std::size_t> FeatureFrame::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    return std::nullopt;
}

FeatureFrame FeatureFrame::slice_rows(std::size_t begin, std::size_t end) const {
    FeatureFrame out;
    out.columns = columns;
    out.indicators = indicators;
    out.target_name = target_name;
    out.dropped_rows = 0;
    for (std::size_t r = begin; r < end && r < nrows(); ++r) {
        out.rows.push_back(rows[r]);
        out.target.push_back(target[r]);
        auto rv = row(r);
        out.data.insert(out.data.end(), rv.begin(), rv.end());
    }
    return out;
}

FeatureFrame FeatureFrame::select_columns(const std::vector<std::string>& keep) const {
    FeatureFrame out;
    std::vector<std::size_t> idx;
    for (const auto& name : keep) {
        auto i = column_index(name);
        if (!i) throw MissingFeatureError(name);
        idx.push_back(*i);
        out.columns.push_back(name);
        out.indicators.push_back(indicators[*i]);
    }
    out.target = target;
    out.target_name = target_name;
    out.rows = rows;
    out.dropped_rows = dropped_rows;
    out.data.reserve(nrows() * idx.size());
    for (std::size_t r = 0; r < nrows(); ++r)
        for (std::size_t i : idx) out.data.push_back(cell(r, i));
    return out;
}

namespace {

struct ColumnBuilder {
    std::string name;
    bool indicator = false;
    std::function<std::optional<double>(std::size_t)> value;  // arg: feature episode index
};

// Shared frame assembly. `with_categoricals`/`with_temporal` extend the core
// lag alignment with the one-hot and calendar blocks.
FeatureFrame build_frame(const ScoreManifest& manifest, const GenreMap* genre_map,
                         std::span<const EpisodeRecord> episodes, const FeatureConfig& config,
                         bool with_categoricals, bool with_temporal, std::size_t winsor_fit_rows,
                         WinsorStats* stats_out) {
    const std::size_t n = episodes.size();
    const std::string show_id = n ? episodes[0].show_id : "";
    if (n < 2) throw TooFewEpisodesError(show_id, n, 2);

    std::vector<double> viewers(n);
    for (std::size_t i = 0; i < n; ++i) viewers[i] = episodes[i].viewers_millions;

    for (const auto& ep : episodes)
        for (double v : ep.nlp)
            if (!std::isfinite(v))
                throw BadCellError(0, "nlp", "non-finite NLP cell in show '" + ep.show_id +
                                                 "' S" + std::to_string(ep.season) + "E" +
                                                 std::to_string(ep.episode));

    // Engineered series over the viewership history.
    std::map<int, std::vector<std::optional<double>>> ma;
    for (int w : config.ma_windows) {
        if (w < 1) throw InvalidSpecError("moving average window must be >= 1");
        ma[w] = moving_average(viewers, w);
    }
    PctChangeSeries pct;
    if (config.target == TargetKind::PctChange) pct = pct_change(viewers);

    // Optional numeric metadata enters only when every feature episode has it.
    bool all_length = true, all_rating = true;
    for (std::size_t t = 0; t + 1 < n; ++t) {
        all_length = all_length && episodes[t].length_minutes.has_value();
        all_rating = all_rating && episodes[t].imdb_rating.has_value();
    }

    std::vector<ColumnBuilder> cols;
    auto num = [&](std::string name, std::function<std::optional<double>(std::size_t)> fn) {
        cols.push_back({std::move(name), false, std::move(fn)});
    };
    auto ind = [&](std::string name, std::function<std::optional<double>(std::size_t)> fn) {
        cols.push_back({std::move(name), true, std::move(fn)});
    };

    if (all_length)
        num("length_minutes", [&](std::size_t t) { return episodes[t].length_minutes; });
    if (all_rating)
        num("imdb_rating", [&](std::size_t t) { return episodes[t].imdb_rating; });

    if (with_categoricals) {
        std::vector<std::string> genres, networks;
        for (std::size_t t = 0; t + 1 < n; ++t) {
            genres.push_back(genre_map->collapse(episodes[t].genre));
            networks.push_back(episodes[t].network);
        }
        for (const auto& oh : {std::pair{std::string("genre_"), one_hot(genres)},
                               std::pair{std::string("network_"), one_hot(networks)}}) {
            const auto& [prefix, enc] = oh;
            for (std::size_t c = 0; c < enc.labels.size(); ++c) {
                auto column = enc.columns[c];
                ind(prefix + enc.labels[c],
                    [column = std::move(column)](std::size_t t) { return column[t]; });
            }
        }
    }

    if (with_temporal && config.include_temporal) {
        // Season extents from the span; the finale/premiere flag is schedule
        // knowledge, not observable from aired episodes alone.
        std::map<int, std::pair<int, int>> extents;
        for (const auto& ep : episodes) {
            auto [it, fresh] = extents.try_emplace(ep.season, ep.episode, ep.episode);
            if (!fresh) {
                it->second.first = std::min(it->second.first, ep.episode);
                it->second.second = std::max(it->second.second, ep.episode);
            }
        }
        auto tf = [&, extents](std::size_t t) {
            const auto& ep = episodes[t];
            auto [lo, hi] = extents.at(ep.season);
            return temporal_features(ep.air_date, ep.episode, lo, hi);
        };
        num("month", [tf](std::size_t t) { return double(tf(t).month); });
        num("year", [tf](std::size_t t) { return double(tf(t).year); });
        num("year_month", [tf](std::size_t t) { return double(tf(t).year_month); });
        num("day_of_week", [tf](std::size_t t) { return double(tf(t).day_of_week); });
        num("season_of_year", [tf](std::size_t t) { return double(int(tf(t).season_of_year)); });
        num("year_season", [tf](std::size_t t) { return double(tf(t).year_season); });
        num("season", [&](std::size_t t) { return double(episodes[t].season); });
        num("episode", [&](std::size_t t) { return double(episodes[t].episode); });
        ind("is_premiere", [tf](std::size_t t) {
            return tf(t).position == EpisodePosition::Premiere ? 1.0 : 0.0;
        });
        ind("is_finale", [tf](std::size_t t) {
            return tf(t).position == EpisodePosition::Finale ? 1.0 : 0.0;
        });
    }

    for (int act = 1; act <= kActs; ++act) {
        for (std::size_t s = 0; s < manifest.score_count(); ++s) {
            const std::size_t flat = manifest.flat_index(act, s);
            num(manifest.column_name(act, s),
                [&episodes, flat](std::size_t t) { return episodes[t].nlp[flat]; });
        }
    }

    if (config.include_prev_viewership)
        num("prev_viewership", [&](std::size_t t) { return viewers[t]; });
    for (int w : config.ma_windows) {
        num("ma" + std::to_string(w) + "_viewership",
            [&ma, w](std::size_t t) { return ma.at(w)[t]; });
    }
    if (config.include_gap_days) {
        num("gap_days", [&](std::size_t t) {
            return double(episodes[t + 1].air_date.serial() - episodes[t].air_date.serial());
        });
    }

    FeatureFrame frame;
    for (const auto& c : cols) {
        frame.columns.push_back(c.name);
        frame.indicators.push_back(c.indicator ? 1 : 0);
    }
    frame.target_name =
        config.target == TargetKind::Level ? "next_viewers_millions" : "next_pct_change";

    for (std::size_t t = 0; t + 1 < n; ++t) {
        std::optional<double> target;
        if (config.target == TargetKind::Level) {
            target = viewers[t + 1];
        } else {
            target = pct.values[t + 1];
        }
        bool defined = target.has_value();
        std::vector<double> row;
        row.reserve(cols.size());
        for (const auto& c : cols) {
            if (!defined) break;
            auto v = c.value(t);
            if (!v) {
                defined = false;
                break;
            }
            row.push_back(*v);
        }
        if (!defined) {
            ++frame.dropped_rows;
            continue;
        }
        frame.data.insert(frame.data.end(), row.begin(), row.end());
        frame.target.push_back(*target);
        frame.rows.push_back({show_id, episodes[t + 1].season, episodes[t + 1].episode,
                              episodes[t + 1].air_date, t + 1, viewers[t], viewers[t + 1]});
    }

    if (config.winsor && frame.nrows() > 0) {
        const std::size_t fit_rows =
            winsor_fit_rows == 0 ? frame.nrows() : std::min(winsor_fit_rows, frame.nrows());
        WinsorStats stats = winsorize_frame(frame, fit_rows, *config.winsor);
        if (stats_out) *stats_out = std::move(stats);
    } else if (stats_out) {
        *stats_out = WinsorStats{};
    }

    return frame;
}

}  // namespace

WinsorStats winsorize_frame(FeatureFrame& frame, std::size_t fit_rows,
                            const WinsorLimits& limits) {
    WinsorStats stats;
    stats.limits = limits;
    fit_rows = std::min(fit_rows, frame.nrows());
    if (fit_rows == 0) return stats;

    const std::size_t nc = frame.ncols();
    std::vector<double> fit_col(fit_rows);
    for (std::size_t c = 0; c < nc; ++c) {
        if (frame.indicators[c]) continue;
        for (std::size_t r = 0; r < fit_rows; ++r) fit_col[r] = frame.cell(r, c);
        ColumnClip clip = winsorize_fit(fit_col, limits.lower_pct, limits.upper_pct);
        stats.feature_clips[frame.columns[c]] = clip;
        for (std::size_t r = 0; r < frame.nrows(); ++r) {
            double& v = frame.data[r * nc + c];
            v = std::clamp(v, clip.lower, clip.upper);
        }
    }
    // The target is clipped inside the fit range only: later rows keep raw
    // values so evaluation still compares against actuals.
    for (std::size_t r = 0; r < fit_rows; ++r) fit_col[r] = frame.target[r];
    ColumnClip tclip = winsorize_fit(fit_col, limits.lower_pct, limits.upper_pct);
    stats.target_clip = tclip;
    for (std::size_t r = 0; r < fit_rows; ++r)
        frame.target[r] = std::clamp(frame.target[r], tclip.lower, tclip.upper);
    return stats;
}

FeatureFrame lag_align(const ScoreManifest& manifest, std::span<const EpisodeRecord> episodes,
                       const FeatureConfig& config) {
    return build_frame(manifest, nullptr, episodes, config, /*with_categoricals=*/false,
                       /*with_temporal=*/false, 0, nullptr);
}

FeatureFrame assemble_design(const ScoreManifest& manifest, const GenreMap& genre_map,
                             std::span<const EpisodeRecord> episodes, const FeatureConfig& config,
                             std::size_t winsor_fit_rows, WinsorStats* stats_out) {
    return build_frame(manifest, &genre_map, episodes, config, /*with_categoricals=*/true,
                       /*with_temporal=*/true, winsor_fit_rows, stats_out);
}

FeatureFrame assemble_design(const EpisodeCorpus& corpus, const std::string& show_id,
                             const GenreMap& genre_map, const FeatureConfig& config,
                             std::size_t winsor_fit_rows, WinsorStats* stats_out) {
    const auto& eps = corpus.air_order(show_id);
    return assemble_design(corpus.manifest(), genre_map, eps, config, winsor_fit_rows, stats_out);
}

}  // namespace viewcast
