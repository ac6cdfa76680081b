#ifndef VIEWCAST_BOOSTING_HPP
#define VIEWCAST_BOOSTING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viewcast/preprocess.hpp"

namespace viewcast {

struct BoostParams {
    int rounds = 100;
    double learning_rate = 0.3;
    int max_depth = 6;
    double lambda = 1.0;            // L2 on leaf weights
    double gamma = 0.0;             // split gain penalty
    double min_child_weight = 1.0;  // minimum hessian sum per child
    std::optional<double> base_score;  // fixed base; defaults to the target mean
    double subsample = 1.0;         // row fraction per round; 1 = off
    std::uint64_t seed = 0;         // used only when subsample < 1

    std::string to_json_text() const;
    static BoostParams from_json_text(const std::string& text);
};

/// Regularized split gain:
///   1/2 [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma
double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma);

/// Newton leaf solution -G/(H+lambda).
double leaf_weight(double g, double h, double lambda);

/// Internal node or leaf. Leaf weights carry the learning rate already.
struct TreeNode {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    bool default_left = true;  // missing-value direction; frames carry no missing cells
    double gain = 0.0;         // recorded split gain (internal nodes)
    double cover = 0.0;        // hessian sum reaching the node
    double weight = 0.0;       // leaf value, learning rate folded in
    double sum_grad = 0.0;     // node statistics, kept for gain replay
    double sum_hess = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double value_for(std::span<const double> row) const;

    /// Distinct feature ids used by internal nodes, ascending.
    std::vector<int> used_features() const;
};

/// Trained boosted ensemble bound to the training frame's column names.
class TreeEnsemble {
public:
    TreeEnsemble() = default;
    TreeEnsemble(double base_score, std::vector<Tree> trees, std::vector<std::string> columns,
                 BoostParams params)
        : base_score_(base_score),
          trees_(std::move(trees)),
          columns_(std::move(columns)),
          params_(std::move(params)) {}

    double base_score() const { return base_score_; }
    const std::vector<Tree>& trees() const { return trees_; }
    const std::vector<std::string>& columns() const { return columns_; }
    const BoostParams& params() const { return params_; }

    /// Row values in binding order. Throws MissingFeatureError on arity mismatch.
    double predict(std::span<const double> row) const;

    /// Predicts every frame row after mapping frame columns onto the binding.
    std::vector<double> predict_frame(const FeatureFrame& frame) const;

    /// Per-feature total recorded split gain, every bound column included,
    /// descending; ties broken by column index.
    std::vector<std::pair<std::string, double>> gain_importance() const;

    std::string to_json_text() const;
    static TreeEnsemble from_json_text(const std::string& text);

private:
    double base_score_ = 0.0;
    std::vector<Tree> trees_;
    std::vector<std::string> columns_;
    BoostParams params_;
};

/// Second-order boosting with squared-error loss (g = yhat - y, h = 1),
/// exact greedy splits over sorted unique values, midpoint thresholds.
/// Deterministic for a given frame and params.
TreeEnsemble train(const FeatureFrame& frame, const BoostParams& params);

struct TrainTrace {
    TreeEnsemble ensemble;
    std::vector<double> round_mse;  // training MSE after each round
};
TrainTrace train_traced(const FeatureFrame& frame, const BoostParams& params);

}  // namespace viewcast

#endif
