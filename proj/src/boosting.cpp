#include "viewcast/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "viewcast/csv.hpp"
#include "viewcast/errors.hpp"

namespace viewcast {

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
    const double g = gl + gr;
    const double h = hl + hr;
    return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) -
           gamma;
}

double leaf_weight(double g, double h, double lambda) { return -g / (h + lambda); }

double Tree::value_for(std::span<const double> row) const {
    int i = 0;
    while (!nodes[i].is_leaf()) {
        i = row[static_cast<std::size_t>(nodes[i].feature)] < nodes[i].threshold ? nodes[i].left
                                                                                 : nodes[i].right;
    }
    return nodes[i].weight;
}

std::vector<int> Tree::used_features() const {
    std::set<int> used;
    for (const auto& n : nodes)
        if (!n.is_leaf()) used.insert(n.feature);
    return {used.begin(), used.end()};
}

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    double gl = 0.0, hl = 0.0, gr = 0.0, hr = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const FeatureFrame& frame, const BoostParams& params)
        : frame_(frame), params_(params) {}

    Tree build(std::span<const std::size_t> rows, std::span<const double> grad) {
        Tree tree;
        grad_ = grad;
        rows_.assign(rows.begin(), rows.end());
        grow(tree, 0, rows_.size(), 0);
        return tree;
    }

private:
    // Grows the node covering rows_[begin, end); returns its index.
    int grow(Tree& tree, std::size_t begin, std::size_t end, int depth) {
        double g = 0.0;
        const double h = static_cast<double>(end - begin);
        for (std::size_t i = begin; i < end; ++i) g += grad_[rows_[i]];

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        {
            TreeNode& node = tree.nodes.back();
            node.cover = h;
            node.sum_grad = g;
            node.sum_hess = h;
            node.weight = params_.learning_rate * leaf_weight(g, h, params_.lambda);
        }

        if (depth >= params_.max_depth || end - begin < 2) return node_id;

        SplitChoice best = find_split(begin, end, g, h);
        if (best.feature < 0) return node_id;

        // Partition rows by the chosen threshold, preserving relative order.
        std::stable_partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                              rows_.begin() + static_cast<std::ptrdiff_t>(end),
                              [&](std::size_t r) {
                                  return frame_.cell(r, static_cast<std::size_t>(best.feature)) <
                                         best.threshold;
                              });
        const std::size_t mid = begin + static_cast<std::size_t>(best.hl);

        const int left = grow(tree, begin, mid, depth + 1);
        const int right = grow(tree, mid, end, depth + 1);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.gain = best.gain;
        node.left = left;
        node.right = right;
        return node_id;
    }

    SplitChoice find_split(std::size_t begin, std::size_t end, double g_total, double h_total) {
        SplitChoice best;
        const std::size_t n = end - begin;
        scratch_.resize(n);

        for (std::size_t f = 0; f < frame_.ncols(); ++f) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t r = rows_[begin + i];
                scratch_[i] = {frame_.cell(r, f), grad_[r]};
            }
            std::sort(scratch_.begin(), scratch_.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double gl = 0.0, hl = 0.0;
            std::size_t i = 0;
            while (i < n) {
                // Consume one group of equal values.
                const double value = scratch_[i].first;
                while (i < n && scratch_[i].first == value) {
                    gl += scratch_[i].second;
                    hl += 1.0;
                    ++i;
                }
                if (i == n) break;
                const double gr = g_total - gl;
                const double hr = h_total - hl;
                if (hl < params_.min_child_weight || hr < params_.min_child_weight) continue;
                const double threshold = value + 0.5 * (scratch_[i].first - value);
                if (!(threshold > value) || !(threshold <= scratch_[i].first))
                    continue;  // adjacent representable values, no separating midpoint
                const double gain =
                    split_gain(gl, hl, gr, hr, params_.lambda, params_.gamma);
                // Strictly-greater comparison: the lowest feature index and
                // earliest threshold win ties, keeping training deterministic.
                if (gain > 0.0 && gain > best.gain)
                    best = {static_cast<int>(f), threshold, gain, gl, hl, gr, hr};
            }
        }
        return best;
    }

    const FeatureFrame& frame_;
    const BoostParams& params_;
    std::span<const double> grad_;
    std::vector<std::size_t> rows_;
    std::vector<std::pair<double, double>> scratch_;  // (value, grad)
};

}  // namespace

static TrainTrace train_impl(const FeatureFrame& frame, const BoostParams& params) {
    const std::size_t n = frame.nrows();
    if (n == 0) throw EmptyFrameError();

    double base = 0.0;
    if (params.base_score) {
        base = *params.base_score;
    } else {
        base = std::accumulate(frame.target.begin(), frame.target.end(), 0.0) /
               static_cast<double>(n);
    }

    std::vector<double> pred(n, base);
    std::vector<double> grad(n);
    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    std::mt19937_64 rng(params.seed);
    const bool subsampling = params.subsample < 1.0;

    TrainTrace trace;
    std::vector<Tree> trees;
    trees.reserve(static_cast<std::size_t>(params.rounds));
    TreeBuilder builder(frame, params);

    std::vector<std::size_t> round_rows;
    for (int round = 0; round < params.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - frame.target[i];

        std::span<const std::size_t> rows = all_rows;
        if (subsampling) {
            const auto keep = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(params.subsample * double(n))));
            round_rows = all_rows;
            for (std::size_t i = 0; i < keep; ++i) {
                const std::size_t pick = i + static_cast<std::size_t>(rng() % (n - i));
                std::swap(round_rows[i], round_rows[pick]);
            }
            round_rows.resize(keep);
            std::sort(round_rows.begin(), round_rows.end());
            rows = round_rows;
        }

        Tree tree = builder.build(rows, grad);
        for (std::size_t i = 0; i < n; ++i) pred[i] += tree.value_for(frame.row(i));
        trees.push_back(std::move(tree));

        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = pred[i] - frame.target[i];
            sse += e * e;
        }
        trace.round_mse.push_back(sse / static_cast<double>(n));
    }

    trace.ensemble = TreeEnsemble(base, std::move(trees), frame.columns, params);
    return trace;
}

TreeEnsemble train(const FeatureFrame& frame, const BoostParams& params) {
    return train_impl(frame, params).ensemble;
}

TrainTrace train_traced(const FeatureFrame& frame, const BoostParams& params) {
    return train_impl(frame, params);
}

double TreeEnsemble::predict(std::span<const double> row) const {
    if (row.size() != columns_.size())
        throw MissingFeatureError(row.size() < columns_.size() ? columns_[row.size()]
                                                               : "(extra values)");
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.value_for(row);
    return base_score_ + sum;
}

std::vector<double> TreeEnsemble::predict_frame(const FeatureFrame& frame) const {
    // Map bound columns onto the frame's layout once.
    std::vector<std::size_t> map;
    map.reserve(columns_.size());
    for (const auto& name : columns_) {
        auto idx = frame.column_index(name);
        if (!idx) throw MissingFeatureError(name);
        map.push_back(*idx);
    }
    std::vector<double> out;
    out.reserve(frame.nrows());
    std::vector<double> row(columns_.size());
    for (std::size_t r = 0; r < frame.nrows(); ++r) {
        auto src = frame.row(r);
        for (std::size_t c = 0; c < map.size(); ++c) row[c] = src[map[c]];
        out.push_back(predict(row));
    }
    return out;
}

std::vector<std::pair<std::string, double>> TreeEnsemble::gain_importance() const {
    std::vector<double> totals(columns_.size(), 0.0);
    for (const auto& tree : trees_)
        for (const auto& node : tree.nodes)
            if (!node.is_leaf()) totals[static_cast<std::size_t>(node.feature)] += node.gain;

    std::vector<std::size_t> order(columns_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return totals[a] > totals[b];  // stable keeps column order on ties
    });

    std::vector<std::pair<std::string, double>> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.emplace_back(columns_[i], totals[i]);
    return out;
}

std::string BoostParams::to_json_text() const {
    nlohmann::json j;
    j["rounds"] = rounds;
    j["learning_rate"] = learning_rate;
    j["max_depth"] = max_depth;
    j["lambda"] = lambda;
    j["gamma"] = gamma;
    j["min_child_weight"] = min_child_weight;
    if (base_score)
        j["base_score"] = *base_score;
    else
        j["base_score"] = nullptr;
    j["subsample"] = subsample;
    j["seed"] = seed;
    return j.dump();
}

BoostParams BoostParams::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpecError(std::string("boost params JSON parse error: ") + e.what());
    }
    BoostParams p;
    p.rounds = j.value("rounds", p.rounds);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.max_depth = j.value("max_depth", p.max_depth);
    p.lambda = j.value("lambda", p.lambda);
    p.gamma = j.value("gamma", p.gamma);
    p.min_child_weight = j.value("min_child_weight", p.min_child_weight);
    if (j.contains("base_score") && !j.at("base_score").is_null())
        p.base_score = j.at("base_score").get<double>();
    p.subsample = j.value("subsample", p.subsample);
    p.seed = j.value("seed", p.seed);
    return p;
}

std::string TreeEnsemble::to_json_text() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["base_score"] = base_score_;
    j["columns"] = columns_;
    j["params"] = nlohmann::json::parse(params_.to_json_text());
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree.nodes) {
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"default_left", n.default_left},
                             {"gain", n.gain},
                             {"cover", n.cover},
                             {"weight", n.weight},
                             {"sum_grad", n.sum_grad},
                             {"sum_hess", n.sum_hess}});
        }
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    j["trees"] = std::move(trees);
    return j.dump();
}

TreeEnsemble TreeEnsemble::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpecError(std::string("model JSON parse error: ") + e.what());
    }
    if (j.value("format_version", 0) != 1) throw InvalidSpecError("unsupported model format");
    std::vector<Tree> trees;
    for (const auto& tj : j.at("trees")) {
        Tree tree;
        for (const auto& nj : tj.at("nodes")) {
            TreeNode n;
            n.feature = nj.at("feature").get<int>();
            n.threshold = nj.at("threshold").get<double>();
            n.left = nj.at("left").get<int>();
            n.right = nj.at("right").get<int>();
            n.default_left = nj.at("default_left").get<bool>();
            n.gain = nj.at("gain").get<double>();
            n.cover = nj.at("cover").get<double>();
            n.weight = nj.at("weight").get<double>();
            n.sum_grad = nj.at("sum_grad").get<double>();
            n.sum_hess = nj.at("sum_hess").get<double>();
            tree.nodes.push_back(n);
        }
        trees.push_back(std::move(tree));
    }
    return TreeEnsemble(j.at("base_score").get<double>(), std::move(trees),
                        j.at("columns").get<std::vector<std::string>>(),
                        BoostParams::from_json_text(j.at("params").dump()));
}

}  // namespace viewcast
