#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prognosis/dataset.hpp"
#include "prognosis/provenance.hpp"
#include "prognosis/rng.hpp"
#include "prognosis/threshold.hpp"

namespace prognosis {

enum class EnsembleKind { RandomForest, ExtraTrees };
enum class Imputation { Mean, Median, Constant };

std::string to_string(EnsembleKind k);  // "rf" / "et"
std::string to_string(Imputation i);    // "mean" / "median" / "constant"
std::optional<EnsembleKind> ensemble_kind_from_string(const std::string& s);
std::optional<Imputation> imputation_from_string(const std::string& s);

struct HyperConfig {
    EnsembleKind kind = EnsembleKind::RandomForest;
    int n_trees = 100;
    std::optional<int> max_depth;  // nullopt = grow until pure
    int min_samples_leaf = 1;
    int n_candidate_features = 1;  // k features examined per node
    bool bootstrap = true;
    Imputation imputation = Imputation::Mean;
    std::uint64_t seed = 0;
};

// Flat node storage; nodes[0] is the root. feature < 0 marks a leaf carrying
// the training class counts.
struct TreeNode {
    int feature = -1;
    double cut = 0.0;
    int left = -1;
    int right = -1;
    std::uint32_t n_alive = 0;
    std::uint32_t n_dead = 0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;
};

double leaf_probability(const TreeNode& leaf, Label y);

struct SplitCandidate {
    int feature = 0;
    double cut = 0.0;
    double impurity = 0.0;  // weighted Gini of the two children
};

// Exhaustive Random-Forest split: the best midpoint between consecutive
// distinct values over the candidate features. Ties break toward the lowest
// feature index, then the lowest cut. Empty when no split strictly improves
// the node impurity.
std::optional<SplitCandidate> best_split_rf(std::span<const std::vector<double>> columns,
                                            std::span<const std::uint8_t> labels,
                                            std::span<const int> rows,
                                            std::span<const int> candidate_features,
                                            int min_samples_leaf);

// Extra-Trees split: one uniform cut in the open (min, max) range per
// candidate feature, best couple by Gini. Empty when no candidate yields a
// valid separation.
std::optional<SplitCandidate> best_split_et(std::span<const std::vector<double>> columns,
                                            std::span<const std::uint8_t> labels,
                                            std::span<const int> rows,
                                            std::span<const int> candidate_features,
                                            int min_samples_leaf, Rng& rng);

struct Forest {
    EnsembleKind kind = EnsembleKind::RandomForest;
    HyperConfig hyper;
    std::vector<std::string> feature_names;
    std::vector<double> imputation_values;  // per feature, learned on training data
    std::optional<double> threshold;        // attached after uncertainty optimization
    std::vector<Tree> trees;

    int width() const { return static_cast<int>(feature_names.size()); }
};

// Learns imputation fills from the training data, then grows n_trees trees
// on the filled matrix. Tree i draws its randomness from the substream
// (hyper.seed, i), so growing in parallel is schedule-independent.
Forest fit(const Dataset& train, const HyperConfig& hyper, int n_threads = 1);

ProbabilityPair predict_proba(const Forest& forest, std::span<const double> row);
Label predict_label(const Forest& forest, std::span<const double> row);

std::vector<ProbabilityPair> predict_proba_all(const Forest& forest, const Dataset& data,
                                               int n_threads = 1);

// Requires an attached threshold; maps each row to dead/alive/uncertain.
std::vector<TriagePrediction> apply_threshold(const Forest& forest, const Dataset& data,
                                              int n_threads = 1);

void save_forest(const Forest& forest, const std::string& path, const Provenance& provenance);
Forest load_forest(const std::string& path, Provenance* provenance = nullptr);

}  // namespace prognosis
