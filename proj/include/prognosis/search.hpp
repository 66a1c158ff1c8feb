#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prognosis/forest.hpp"

namespace prognosis {

// Stratified k-fold partition; fold f of class c takes every k-th sample of
// the shuffled class block, so per-fold class counts stay within one of each
// other. Returns row indices per fold.
std::vector<std::vector<int>> stratified_kfold(const std::vector<Label>& labels, int k,
                                               std::uint64_t seed);

// Sampling ranges for the random search. `full` mirrors the budget used in
// the reference experiments; `smoke` shrinks the forests so a whole pipeline
// run stays desk-scale.
struct SearchSpace {
    int n_trees_min = 50;
    int n_trees_max = 500;
    int max_depth_min = 3;
    int max_depth_max = 20;  // one extra slot encodes "unlimited"
    int min_samples_leaf_min = 1;
    int min_samples_leaf_max = 10;
    std::vector<EnsembleKind> kinds{EnsembleKind::RandomForest, EnsembleKind::ExtraTrees};
    std::vector<Imputation> imputations{Imputation::Mean, Imputation::Median,
                                        Imputation::Constant};
    std::vector<bool> bootstrap_choices{false, true};

    static SearchSpace full();
    static SearchSpace smoke();
    static SearchSpace tiny();  // fast preset for smoke tests and dry runs
};

std::optional<SearchSpace> search_space_from_string(const std::string& name);

// One uniform draw per hyperparameter; k (candidate features per node) is
// uniform over [1, feature_width].
HyperConfig sample_config(const SearchSpace& space, int feature_width, Rng& rng);

struct SearchSpec {
    int n_configs = 4096;
    std::optional<int> k_folds;  // nullopt = auto: 10 if rows >= 600 else 5
    double max_u = 0.25;
    int n_thresholds = 100;
    SearchSpace space = SearchSpace::full();
    std::uint64_t seed = 0;
};

int auto_fold_count(std::size_t n_rows);

struct FoldOutcome {
    double score = 0.0;
    double threshold = 0.0;
};

struct CvResult {
    double mean_score = 0.0;
    double mean_threshold = 0.0;
    std::vector<FoldOutcome> folds;
};

// k-fold cross validation of one configuration: fit on k-1 folds, optimize
// the uncertainty threshold on the held-out fold, average the per-fold
// (score, threshold) pairs. Throws CvError when a fold cannot be fitted.
struct CvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

CvResult cross_validate(const Dataset& dataset, const HyperConfig& config,
                        const std::vector<std::vector<int>>& folds, double max_u,
                        int n_thresholds);

CvResult cross_validate(const Dataset& dataset, const HyperConfig& config, int k, double max_u,
                        int n_thresholds, std::uint64_t fold_seed);

struct ConfigLogEntry {
    int draw_index = 0;
    HyperConfig config;
    CvResult cv;
};

struct FailedConfig {
    int draw_index = 0;
    HyperConfig config;
    std::string reason;
};

struct SearchResult {
    HyperConfig best_config;
    double best_score = 0.0;
    double best_threshold = 0.0;
    int best_index = 0;
    std::vector<ConfigLogEntry> log;     // successful configs, in draw order
    std::vector<FailedConfig> failures;
};

// Evaluates n_configs random configurations on shared folds; ties keep the
// earlier draw. Config i derives its rng stream from (seed, i), so the
// outcome is identical for any parallelism.
SearchResult run_search(const Dataset& train, const SearchSpec& spec, int n_threads = 1);

// run_search plus a refit of the winner on the full training set with the
// fold-averaged threshold attached.
struct TrainedModel {
    SearchResult search;
    Forest forest;
};

TrainedModel random_search(const Dataset& train, const SearchSpec& spec, int n_threads = 1);

void write_search_log(const std::string& path, const SearchResult& result);

}  // namespace prognosis
