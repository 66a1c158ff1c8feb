#include "prognosis/search.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "prognosis/csv.hpp"
#include "prognosis/parallel.hpp"

namespace prognosis {

std::vector<std::vector<int>> stratified_kfold(const std::vector<Label>& labels, int k,
                                               std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
    std::vector<int> dead, alive;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == Label::Dead ? dead : alive).push_back(static_cast<int>(i));
    }
    if (static_cast<int>(dead.size()) < k || static_cast<int>(alive.size()) < k) {
        throw std::invalid_argument("stratified_kfold: every class needs at least k samples");
    }

    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    int class_index = 0;
    for (auto* cls : {&alive, &dead}) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(class_index++)));
        for (std::size_t i = cls->size(); i > 1; --i) {
            const auto j =
                static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(i) - 1));
            std::swap((*cls)[i - 1], (*cls)[j]);
        }
        for (std::size_t i = 0; i < cls->size(); ++i) {
            folds[i % static_cast<std::size_t>(k)].push_back((*cls)[i]);
        }
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

SearchSpace SearchSpace::full() { return SearchSpace{}; }

SearchSpace SearchSpace::smoke() {
    SearchSpace s;
    s.n_trees_min = 50;
    s.n_trees_max = 200;
    s.max_depth_max = 16;
    return s;
}

SearchSpace SearchSpace::tiny() {
    SearchSpace s;
    s.n_trees_min = 10;
    s.n_trees_max = 30;
    s.max_depth_max = 10;
    return s;
}

std::optional<SearchSpace> search_space_from_string(const std::string& name) {
    if (name == "full") return SearchSpace::full();
    if (name == "smoke") return SearchSpace::smoke();
    if (name == "tiny") return SearchSpace::tiny();
    return std::nullopt;
}

HyperConfig sample_config(const SearchSpace& space, int feature_width, Rng& rng) {
    HyperConfig h;
    h.kind = space.kinds[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<long long>(space.kinds.size()) - 1))];
    h.n_trees = static_cast<int>(rng.uniform_int(space.n_trees_min, space.n_trees_max));
    // depth: uniform over {min..max, unlimited}
    const auto depth_draw = rng.uniform_int(space.max_depth_min, space.max_depth_max + 1);
    if (depth_draw <= space.max_depth_max) h.max_depth = static_cast<int>(depth_draw);
    h.min_samples_leaf =
        static_cast<int>(rng.uniform_int(space.min_samples_leaf_min, space.min_samples_leaf_max));
    h.n_candidate_features = static_cast<int>(rng.uniform_int(1, feature_width));
    h.bootstrap = space.bootstrap_choices[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<long long>(space.bootstrap_choices.size()) - 1))];
    h.imputation = space.imputations[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<long long>(space.imputations.size()) - 1))];
    h.seed = rng.next_u64();
    return h;
}

int auto_fold_count(std::size_t n_rows) { return n_rows >= 600 ? 10 : 5; }

namespace {

Dataset subset(const Dataset& d, const std::vector<int>& rows) {
    Dataset out;
    out.day = d.day;
    out.phase = d.phase;
    out.form = d.form;
    out.feature_names = d.feature_names;
    out.rows.reserve(rows.size());
    for (int r : rows) {
        out.rows.push_back(d.rows[static_cast<std::size_t>(r)]);
        out.labels.push_back(d.labels[static_cast<std::size_t>(r)]);
        out.patient_ids.push_back(d.patient_ids[static_cast<std::size_t>(r)]);
    }
    return out;
}

}  // namespace

CvResult cross_validate(const Dataset& dataset, const HyperConfig& config,
                        const std::vector<std::vector<int>>& folds, double max_u,
                        int n_thresholds) {
    CvResult result;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<int> fit_rows;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g == f) continue;
            fit_rows.insert(fit_rows.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(fit_rows.begin(), fit_rows.end());

        const Dataset fit_side = subset(dataset, fit_rows);
        const Dataset val_side = subset(dataset, folds[f]);

        HyperConfig fold_config = config;
        fold_config.seed = derive_seed(config.seed, f);
        Forest forest;
        try {
            forest = fit(fit_side, fold_config);
        } catch (const std::invalid_argument& e) {
            throw CvError("fold " + std::to_string(f) + ": " + e.what());
        }

        const auto probs = predict_proba_all(forest, val_side);
        const auto t = find_uncertain_threshold(val_side.labels, probs, max_u, n_thresholds);
        result.folds.push_back({t.score, t.threshold});
    }
    double score_sum = 0.0, th_sum = 0.0;
    for (const auto& f : result.folds) {
        score_sum += f.score;
        th_sum += f.threshold;
    }
    result.mean_score = score_sum / static_cast<double>(result.folds.size());
    result.mean_threshold = th_sum / static_cast<double>(result.folds.size());
    return result;
}

CvResult cross_validate(const Dataset& dataset, const HyperConfig& config, int k, double max_u,
                        int n_thresholds, std::uint64_t fold_seed) {
    return cross_validate(dataset, config, stratified_kfold(dataset.labels, k, fold_seed), max_u,
                          n_thresholds);
}

SearchResult run_search(const Dataset& train, const SearchSpec& spec, int n_threads) {
    if (spec.n_configs < 1) throw std::invalid_argument("search needs n_configs >= 1");
    const int k = spec.k_folds ? *spec.k_folds : auto_fold_count(train.size());
    const auto folds = stratified_kfold(train.labels, k, derive_seed(spec.seed, 0xF01D5ull));

    struct Slot {
        HyperConfig config;
        CvResult cv;
        bool failed = false;
        std::string reason;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(spec.n_configs));

    parallel_for(slots.size(), n_threads, [&](std::size_t i) {
        Rng rng(derive_seed(spec.seed, i));
        Slot& slot = slots[i];
        slot.config = sample_config(spec.space, train.width(), rng);
        try {
            slot.cv = cross_validate(train, slot.config, folds, spec.max_u, spec.n_thresholds);
        } catch (const CvError& e) {
            slot.failed = true;
            slot.reason = e.what();
        }
    });

    SearchResult result;
    bool have_best = false;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const Slot& slot = slots[i];
        if (slot.failed) {
            result.failures.push_back({static_cast<int>(i), slot.config, slot.reason});
            continue;
        }
        result.log.push_back({static_cast<int>(i), slot.config, slot.cv});
        if (!have_best || slot.cv.mean_score > result.best_score) {  // ties keep the earlier draw
            have_best = true;
            result.best_index = static_cast<int>(i);
            result.best_config = slot.config;
            result.best_score = slot.cv.mean_score;
            result.best_threshold = slot.cv.mean_threshold;
        }
    }
    if (!have_best) throw std::runtime_error("random search: every configuration failed");
    return result;
}

TrainedModel random_search(const Dataset& train, const SearchSpec& spec, int n_threads) {
    TrainedModel out;
    out.search = run_search(train, spec, n_threads);
    out.forest = fit(train, out.search.best_config, n_threads);
    out.forest.threshold = out.search.best_threshold;
    return out;
}

void write_search_log(const std::string& path, const SearchResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write search log: " + path);
    out << "config_index,status,ensemble,n_trees,max_depth,min_samples_leaf,"
           "n_candidate_features,bootstrap,imputation,seed,fold_scores,fold_thresholds,"
           "mean_score,mean_threshold\n";

    auto config_fields = [](const HyperConfig& h) {
        std::string s = to_string(h.kind) + "," + std::to_string(h.n_trees) + "," +
                        (h.max_depth ? std::to_string(*h.max_depth) : std::string{}) + "," +
                        std::to_string(h.min_samples_leaf) + "," +
                        std::to_string(h.n_candidate_features) + "," +
                        (h.bootstrap ? "true" : "false") + "," + to_string(h.imputation) + "," +
                        std::to_string(h.seed);
        return s;
    };

    std::size_t ok = 0, bad = 0;
    for (int i = 0; ok < result.log.size() || bad < result.failures.size(); ++i) {
        if (ok < result.log.size() && result.log[ok].draw_index == i) {
            const auto& e = result.log[ok++];
            std::string scores, thresholds;
            for (const auto& f : e.cv.folds) {
                if (!scores.empty()) {
                    scores.push_back(';');
                    thresholds.push_back(';');
                }
                scores += csv::format_double(f.score);
                thresholds += csv::format_double(f.threshold);
            }
            out << i << ",ok," << config_fields(e.config) << ',' << scores << ',' << thresholds
                << ',' << csv::format_double(e.cv.mean_score) << ','
                << csv::format_double(e.cv.mean_threshold) << '\n';
        } else if (bad < result.failures.size() && result.failures[bad].draw_index == i) {
            const auto& e = result.failures[bad++];
            out << i << ",failed," << config_fields(e.config) << ",,,,\n";
        }
    }
}

}  // namespace prognosis
