#include "prognosis/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "prognosis/parallel.hpp"

namespace prognosis {

using nlohmann::json;

std::string to_string(EnsembleKind k) { return k == EnsembleKind::RandomForest ? "rf" : "et"; }

std::string to_string(Imputation i) {
    switch (i) {
        case Imputation::Mean: return "mean";
        case Imputation::Median: return "median";
        case Imputation::Constant: return "constant";
    }
    return "?";
}

std::optional<EnsembleKind> ensemble_kind_from_string(const std::string& s) {
    if (s == "rf") return EnsembleKind::RandomForest;
    if (s == "et") return EnsembleKind::ExtraTrees;
    return std::nullopt;
}

std::optional<Imputation> imputation_from_string(const std::string& s) {
    if (s == "mean") return Imputation::Mean;
    if (s == "median") return Imputation::Median;
    if (s == "constant") return Imputation::Constant;
    return std::nullopt;
}

double leaf_probability(const TreeNode& leaf, Label y) {
    const double total = static_cast<double>(leaf.n_alive) + static_cast<double>(leaf.n_dead);
    if (total <= 0) throw std::logic_error("leaf with no training samples");
    return (y == Label::Dead ? leaf.n_dead : leaf.n_alive) / total;
}

namespace {

// Weighted Gini of a (left, right) count split. Written out from the integer
// counts so the independently-coded enumeration oracle lands on bit-identical
// doubles.
inline double weighted_gini(long long la, long long ld, long long ra, long long rd) {
    const double ml = static_cast<double>(la + ld);
    const double mr = static_cast<double>(ra + rd);
    const double gl =
        1.0 - (static_cast<double>(la) * la + static_cast<double>(ld) * ld) / (ml * ml);
    const double gr =
        1.0 - (static_cast<double>(ra) * ra + static_cast<double>(rd) * rd) / (mr * mr);
    return (ml * gl + mr * gr) / (ml + mr);
}

inline double node_gini(long long na, long long nd) {
    const double m = static_cast<double>(na + nd);
    return 1.0 - (static_cast<double>(na) * na + static_cast<double>(nd) * nd) / (m * m);
}

}  // namespace

std::optional<SplitCandidate> best_split_rf(std::span<const std::vector<double>> columns,
                                            std::span<const std::uint8_t> labels,
                                            std::span<const int> rows,
                                            std::span<const int> candidate_features,
                                            int min_samples_leaf) {
    const long long n = static_cast<long long>(rows.size());
    long long total_dead = 0;
    for (int r : rows) total_dead += labels[static_cast<std::size_t>(r)];
    const long long total_alive = n - total_dead;
    if (n < 2 || total_dead == 0 || total_alive == 0) return std::nullopt;

    const double parent = node_gini(total_alive, total_dead);
    std::optional<SplitCandidate> best;

    std::vector<std::pair<double, std::uint8_t>> vals;
    vals.reserve(rows.size());
    for (int f : candidate_features) {
        const auto& col = columns[static_cast<std::size_t>(f)];
        vals.clear();
        for (int r : rows) {
            vals.emplace_back(col[static_cast<std::size_t>(r)], labels[static_cast<std::size_t>(r)]);
        }
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        long long la = 0, ld = 0;
        std::size_t i = 0;
        while (i < vals.size()) {
            // absorb the run of equal values
            std::size_t j = i;
            while (j < vals.size() && vals[j].first == vals[i].first) {
                ld += vals[j].second;
                la += 1 - vals[j].second;
                ++j;
            }
            if (j == vals.size()) break;  // no value beyond this run: no cut here
            const long long left = la + ld;
            const long long right = n - left;
            if (left >= min_samples_leaf && right >= min_samples_leaf) {
                const double a = vals[i].first;
                const double b = vals[j].first;
                double cut = a + (b - a) / 2.0;
                if (!(cut < b)) cut = a;  // adjacent doubles: keep `value <= cut` == left side
                const double impurity = weighted_gini(la, ld, total_alive - la, total_dead - ld);
                if (impurity < parent && (!best || impurity < best->impurity)) {
                    best = SplitCandidate{f, cut, impurity};
                }
            }
            i = j;
        }
    }
    return best;
}

std::optional<SplitCandidate> best_split_et(std::span<const std::vector<double>> columns,
                                            std::span<const std::uint8_t> labels,
                                            std::span<const int> rows,
                                            std::span<const int> candidate_features,
                                            int min_samples_leaf, Rng& rng) {
    const long long n = static_cast<long long>(rows.size());
    if (n < 2) return std::nullopt;
    long long total_dead = 0;
    for (int r : rows) total_dead += labels[static_cast<std::size_t>(r)];
    const long long total_alive = n - total_dead;

    std::optional<SplitCandidate> best;
    for (int f : candidate_features) {
        const auto& col = columns[static_cast<std::size_t>(f)];
        double lo = col[static_cast<std::size_t>(rows[0])];
        double hi = lo;
        for (int r : rows) {
            const double v = col[static_cast<std::size_t>(r)];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(lo < hi)) continue;  // collapsed range, no cut for this feature

        double cut;
        do {
            cut = lo + rng.uniform() * (hi - lo);
        } while (!(cut > lo && cut < hi));

        long long la = 0, ld = 0;
        for (int r : rows) {
            if (col[static_cast<std::size_t>(r)] <= cut) {
                ld += labels[static_cast<std::size_t>(r)];
                la += 1 - labels[static_cast<std::size_t>(r)];
            }
        }
        const long long left = la + ld;
        const long long right = n - left;
        if (left < min_samples_leaf || right < min_samples_leaf) continue;

        const double impurity = weighted_gini(la, ld, total_alive - la, total_dead - ld);
        if (!best || impurity < best->impurity) best = SplitCandidate{f, cut, impurity};
    }
    return best;
}

namespace {

// Grows one tree over an imputed column-major matrix. Scratch buffers are
// reused across nodes; traversal is preorder left-first so the per-node rng
// draw sequence is reproducible.
class TreeBuilder {
public:
    TreeBuilder(const std::vector<std::vector<double>>& columns,
                const std::vector<std::uint8_t>& labels, const HyperConfig& hyper,
                std::uint64_t tree_seed)
        : columns_(columns), labels_(labels), hyper_(hyper), rng_(tree_seed) {}

    Tree build() {
        const int n = static_cast<int>(labels_.size());
        rows_.resize(static_cast<std::size_t>(n));
        if (hyper_.bootstrap) {
            for (auto& r : rows_) r = static_cast<int>(rng_.uniform_int(0, n - 1));
        } else {
            std::iota(rows_.begin(), rows_.end(), 0);
        }
        feature_pool_.resize(columns_.size());
        std::iota(feature_pool_.begin(), feature_pool_.end(), 0);

        Tree tree;
        grow(tree, 0, static_cast<int>(rows_.size()), 0);
        return tree;
    }

private:
    int grow(Tree& tree, int begin, int end, int depth) {
        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        std::uint32_t n_dead = 0;
        for (int i = begin; i < end; ++i) n_dead += labels_[static_cast<std::size_t>(rows_[i])];
        const std::uint32_t n_total = static_cast<std::uint32_t>(end - begin);
        const std::uint32_t n_alive = n_total - n_dead;

        auto make_leaf = [&] {
            tree.nodes[node_index].n_alive = n_alive;
            tree.nodes[node_index].n_dead = n_dead;
            return node_index;
        };

        if (n_dead == 0 || n_alive == 0) return make_leaf();
        if (hyper_.max_depth && depth >= *hyper_.max_depth) return make_leaf();
        if (static_cast<int>(n_total) < 2 * hyper_.min_samples_leaf) return make_leaf();

        const auto candidates = sample_features();
        const std::span<const int> node_rows(rows_.data() + begin,
                                             static_cast<std::size_t>(end - begin));
        std::optional<SplitCandidate> split;
        if (hyper_.kind == EnsembleKind::RandomForest) {
            split = best_split_rf(columns_, labels_, node_rows, candidates,
                                  hyper_.min_samples_leaf);
        } else {
            split = best_split_et(columns_, labels_, node_rows, candidates,
                                  hyper_.min_samples_leaf, rng_);
        }
        if (!split) return make_leaf();

        const auto& col = columns_[static_cast<std::size_t>(split->feature)];
        const double cut = split->cut;
        auto mid_it = std::partition(rows_.begin() + begin, rows_.begin() + end,
                                     [&](int r) { return col[static_cast<std::size_t>(r)] <= cut; });
        const int mid = static_cast<int>(mid_it - rows_.begin());
        if (mid == begin || mid == end) return make_leaf();  // degenerate cut

        tree.nodes[node_index].feature = split->feature;
        tree.nodes[node_index].cut = cut;
        tree.nodes[node_index].n_alive = n_alive;
        tree.nodes[node_index].n_dead = n_dead;
        const int left = grow(tree, begin, mid, depth + 1);
        const int right = grow(tree, mid, end, depth + 1);
        tree.nodes[node_index].left = left;
        tree.nodes[node_index].right = right;
        return node_index;
    }

    std::span<const int> sample_features() {
        const int width = static_cast<int>(columns_.size());
        const int k = std::min(hyper_.n_candidate_features, width);
        if (k >= width) {
            // no rng draw: the full feature set in index order
            return {feature_pool_.data(), static_cast<std::size_t>(width)};
        }
        for (int i = 0; i < k; ++i) {
            const int j = static_cast<int>(rng_.uniform_int(i, width - 1));
            std::swap(feature_pool_[static_cast<std::size_t>(i)],
                      feature_pool_[static_cast<std::size_t>(j)]);
        }
        std::sort(feature_pool_.begin(), feature_pool_.begin() + k);
        return {feature_pool_.data(), static_cast<std::size_t>(k)};
    }

    const std::vector<std::vector<double>>& columns_;
    const std::vector<std::uint8_t>& labels_;
    const HyperConfig& hyper_;
    Rng rng_;
    std::vector<int> rows_;
    std::vector<int> feature_pool_;
};

std::vector<double> learn_imputation(const Dataset& train, Imputation kind) {
    const int width = train.width();
    std::vector<double> fills(static_cast<std::size_t>(width), -1.0);
    if (kind == Imputation::Constant) return fills;

    for (int f = 0; f < width; ++f) {
        std::vector<double> observed;
        observed.reserve(train.rows.size());
        for (const auto& row : train.rows) {
            const double v = row[static_cast<std::size_t>(f)];
            if (!std::isnan(v)) observed.push_back(v);
        }
        if (observed.empty()) continue;  // nothing observed: keep the -1 fill
        if (kind == Imputation::Mean) {
            fills[static_cast<std::size_t>(f)] =
                std::accumulate(observed.begin(), observed.end(), 0.0) /
                static_cast<double>(observed.size());
        } else {
            fills[static_cast<std::size_t>(f)] = median(std::move(observed));
        }
    }
    return fills;
}

}  // namespace

Forest fit(const Dataset& train, const HyperConfig& hyper, int n_threads) {
    const std::size_t n = train.rows.size();
    if (n == 0) throw std::invalid_argument("fit: empty training dataset");
    const int width = train.width();
    for (const auto& row : train.rows) {
        if (static_cast<int>(row.size()) != width) {
            throw std::invalid_argument("fit: feature width mismatch in training rows");
        }
    }
    if (hyper.n_trees < 1) throw std::invalid_argument("fit: n_trees must be >= 1");
    if (hyper.min_samples_leaf < 1) throw std::invalid_argument("fit: min_samples_leaf >= 1");
    if (hyper.n_candidate_features < 1 || hyper.n_candidate_features > width) {
        throw std::invalid_argument("fit: candidate feature count must be in [1, width]");
    }

    bool has_dead = false, has_alive = false;
    for (Label l : train.labels) (l == Label::Dead ? has_dead : has_alive) = true;
    if (!has_dead || !has_alive) {
        throw std::invalid_argument("fit: training data must contain both classes");
    }

    Forest forest;
    forest.kind = hyper.kind;
    forest.hyper = hyper;
    forest.feature_names = train.feature_names;
    forest.imputation_values = learn_imputation(train, hyper.imputation);

    // imputed column-major copy shared read-only by all trees
    std::vector<std::vector<double>> columns(static_cast<std::size_t>(width),
                                             std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (int f = 0; f < width; ++f) {
            const double v = train.rows[r][static_cast<std::size_t>(f)];
            columns[static_cast<std::size_t>(f)][r] =
                std::isnan(v) ? forest.imputation_values[static_cast<std::size_t>(f)] : v;
        }
    }
    std::vector<std::uint8_t> labels(n);
    for (std::size_t r = 0; r < n; ++r) labels[r] = train.labels[r] == Label::Dead ? 1 : 0;

    forest.trees.resize(static_cast<std::size_t>(hyper.n_trees));
    parallel_for(static_cast<std::size_t>(hyper.n_trees), n_threads, [&](std::size_t i) {
        TreeBuilder builder(columns, labels, hyper, derive_seed(hyper.seed, i));
        forest.trees[i] = builder.build();
    });
    return forest;
}

ProbabilityPair predict_proba(const Forest& forest, std::span<const double> row) {
    if (static_cast<int>(row.size()) != forest.width()) {
        throw std::invalid_argument("predict: row width does not match the model");
    }
    double sum_dead = 0.0;
    for (const auto& tree : forest.trees) {
        int node = 0;
        while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
            const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
            double v = row[static_cast<std::size_t>(nd.feature)];
            if (std::isnan(v)) v = forest.imputation_values[static_cast<std::size_t>(nd.feature)];
            node = v <= nd.cut ? nd.left : nd.right;
        }
        sum_dead += leaf_probability(tree.nodes[static_cast<std::size_t>(node)], Label::Dead);
    }
    const double p_dead = sum_dead / static_cast<double>(forest.trees.size());
    return {1.0 - p_dead, p_dead};
}

Label predict_label(const Forest& forest, std::span<const double> row) {
    return predict_proba(forest, row).argmax();
}

std::vector<ProbabilityPair> predict_proba_all(const Forest& forest, const Dataset& data,
                                               int n_threads) {
    std::vector<ProbabilityPair> out(data.rows.size());
    parallel_for(data.rows.size(), n_threads,
                 [&](std::size_t i) { out[i] = predict_proba(forest, data.rows[i]); });
    return out;
}

std::vector<TriagePrediction> apply_threshold(const Forest& forest, const Dataset& data,
                                              int n_threads) {
    if (!forest.threshold) {
        throw std::invalid_argument(
            "model has no uncertainty threshold; train with threshold optimization first");
    }
    const auto probs = predict_proba_all(forest, data, n_threads);
    std::vector<TriagePrediction> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = triage(probs[i], *forest.threshold);
    return out;
}

namespace {

json node_to_json(const Tree& tree, int index) {
    const auto& n = tree.nodes[static_cast<std::size_t>(index)];
    if (n.is_leaf()) {
        return json{{"counts", {n.n_alive, n.n_dead}}};
    }
    json j;
    j["feature"] = n.feature;
    j["cut"] = n.cut;
    j["left"] = node_to_json(tree, n.left);
    j["right"] = node_to_json(tree, n.right);
    return j;
}

int node_from_json(const json& j, Tree& tree) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("counts")) {
        tree.nodes[static_cast<std::size_t>(index)].n_alive = j.at("counts").at(0).get<std::uint32_t>();
        tree.nodes[static_cast<std::size_t>(index)].n_dead = j.at("counts").at(1).get<std::uint32_t>();
        return index;
    }
    tree.nodes[static_cast<std::size_t>(index)].feature = j.at("feature").get<int>();
    tree.nodes[static_cast<std::size_t>(index)].cut = j.at("cut").get<double>();
    const int left = node_from_json(j.at("left"), tree);
    const int right = node_from_json(j.at("right"), tree);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    tree.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
}

json hyper_to_json(const HyperConfig& h) {
    json j;
    j["ensemble_kind"] = to_string(h.kind);
    j["n_trees"] = h.n_trees;
    j["max_depth"] = h.max_depth ? json(*h.max_depth) : json(nullptr);
    j["min_samples_leaf"] = h.min_samples_leaf;
    j["n_candidate_features"] = h.n_candidate_features;
    j["bootstrap"] = h.bootstrap;
    j["imputation"] = to_string(h.imputation);
    j["seed"] = h.seed;
    return j;
}

HyperConfig hyper_from_json(const json& j) {
    HyperConfig h;
    h.kind = *ensemble_kind_from_string(j.at("ensemble_kind").get<std::string>());
    h.n_trees = j.at("n_trees").get<int>();
    if (!j.at("max_depth").is_null()) h.max_depth = j.at("max_depth").get<int>();
    h.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    h.n_candidate_features = j.at("n_candidate_features").get<int>();
    h.bootstrap = j.at("bootstrap").get<bool>();
    h.imputation = *imputation_from_string(j.at("imputation").get<std::string>());
    h.seed = j.at("seed").get<std::uint64_t>();
    return h;
}

}  // namespace

void save_forest(const Forest& forest, const std::string& path, const Provenance& provenance) {
    json j;
    j["format_version"] = 1;
    j["ensemble_kind"] = to_string(forest.kind);
    j["hyper"] = hyper_to_json(forest.hyper);
    j["feature_names"] = forest.feature_names;
    j["imputation_values"] = forest.imputation_values;
    j["threshold"] = forest.threshold ? json(*forest.threshold) : json(nullptr);
    json trees = json::array();
    for (const auto& t : forest.trees) trees.push_back(node_to_json(t, 0));
    j["trees"] = std::move(trees);
    j["provenance"] = provenance_to_json(provenance);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump() << '\n';
}

Forest load_forest(const std::string& path, Provenance* provenance) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("model file " + path + " is not valid JSON: " + e.what());
    }
    if (j.value("format_version", 0) != 1) {
        throw std::runtime_error("model file " + path + ": unsupported format_version");
    }
    if (!j.contains("provenance")) {
        throw std::runtime_error("model file " + path + ": missing provenance block");
    }
    Forest f;
    f.kind = *ensemble_kind_from_string(j.at("ensemble_kind").get<std::string>());
    f.hyper = hyper_from_json(j.at("hyper"));
    f.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    f.imputation_values = j.at("imputation_values").get<std::vector<double>>();
    if (!j.at("threshold").is_null()) f.threshold = j.at("threshold").get<double>();
    for (const auto& jt : j.at("trees")) {
        Tree t;
        node_from_json(jt, t);
        f.trees.push_back(std::move(t));
    }
    if (provenance) *provenance = provenance_from_json(j.at("provenance"));
    return f;
}

}  // namespace prognosis
