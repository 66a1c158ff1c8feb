#pragma once

// Independent reference implementations used to freeze expected values.
// Everything here is deliberately brute force and shares no code with the
// library paths it checks.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "prognosis/cohort.hpp"
#include "prognosis/threshold.hpp"

namespace oracle {

using prognosis::Label;
using prognosis::ProbabilityPair;

struct SplitChoice {
    int feature = 0;
    double cut = 0.0;
    double impurity = 0.0;
};

// Enumerates every (feature, midpoint) candidate by re-counting the class
// totals per side from scratch. rows is row-major.
inline std::optional<SplitChoice> brute_force_best_split(
    const std::vector<std::vector<double>>& rows, const std::vector<Label>& labels,
    int min_samples_leaf = 1) {
    const std::size_t n = rows.size();
    if (n < 2) return std::nullopt;
    long long dead = 0;
    for (Label l : labels) dead += l == Label::Dead;
    const long long alive = static_cast<long long>(n) - dead;
    if (dead == 0 || alive == 0) return std::nullopt;

    const double parent =
        1.0 - (static_cast<double>(alive) * alive + static_cast<double>(dead) * dead) /
                  (static_cast<double>(n) * n);

    std::optional<SplitChoice> best;
    const std::size_t width = rows[0].size();
    for (std::size_t f = 0; f < width; ++f) {
        std::vector<double> values;
        for (const auto& r : rows) values.push_back(r[f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            double cut = values[i] + (values[i + 1] - values[i]) / 2.0;
            if (!(cut < values[i + 1])) cut = values[i];
            long long la = 0, ld = 0, ra = 0, rd = 0;
            for (std::size_t r = 0; r < n; ++r) {
                const bool left = rows[r][f] <= cut;
                const bool is_dead = labels[r] == Label::Dead;
                if (left && is_dead) ++ld;
                else if (left) ++la;
                else if (is_dead) ++rd;
                else ++ra;
            }
            if (la + ld < min_samples_leaf || ra + rd < min_samples_leaf) continue;
            const double ml = static_cast<double>(la + ld);
            const double mr = static_cast<double>(ra + rd);
            const double gl =
                1.0 - (static_cast<double>(la) * la + static_cast<double>(ld) * ld) / (ml * ml);
            const double gr =
                1.0 - (static_cast<double>(ra) * ra + static_cast<double>(rd) * rd) / (mr * mr);
            const double impurity = (ml * gl + mr * gr) / (ml + mr);
            if (impurity < parent && (!best || impurity < best->impurity)) {
                best = SplitChoice{static_cast<int>(f), cut, impurity};
            }
        }
    }
    return best;
}

// Direct transcription of the threshold-search pseudocode: grid from
// min(P_max), strict keep rule, early return once the rejected share reaches
// max_u, update only on strict improvement.
inline std::pair<double, double> exhaustive_threshold(const std::vector<Label>& truth,
                                                      const std::vector<ProbabilityPair>& probs,
                                                      double max_u, int n,
                                                      const prognosis::ScoreFn& score) {
    std::vector<Label> pred;
    std::vector<double> pmax;
    for (const auto& p : probs) {
        pred.push_back(p.dead >= p.alive ? Label::Dead : Label::Alive);
        pmax.push_back(std::max(p.alive, p.dead));
    }
    double v = score(truth, pred);
    double lo = pmax[0], hi = pmax[0];
    for (double p : pmax) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    double th = lo;
    const double delta = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
        const double cand = lo + i * delta;
        std::vector<Label> t2, p2;
        for (std::size_t j = 0; j < pmax.size(); ++j) {
            if (pmax[j] > cand) {
                t2.push_back(truth[j]);
                p2.push_back(pred[j]);
            }
        }
        const double u = 1.0 - static_cast<double>(t2.size()) / pmax.size();
        if (u >= max_u) return {v, th};
        const double v2 = score(t2, p2);
        if (v2 > v) {
            v = v2;
            th = cand;
        }
    }
    return {v, th};
}

// O(n^2) concordance count: P(dead sample outranks alive sample), ties 0.5.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<Label>& labels) {
    double num = 0.0;
    long long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != Label::Dead) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != Label::Alive) continue;
            ++pairs;
            if (scores[i] > scores[j]) num += 1.0;
            else if (scores[i] == scores[j]) num += 0.5;
        }
    }
    return num / static_cast<double>(pairs);
}

// Independent macro-F2 used when checking reported metrics.
inline double macro_f2_recount(const std::vector<Label>& truth, const std::vector<Label>& pred) {
    auto fbeta_for = [&](Label positive) {
        long long tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool is_pos = truth[i] == positive;
            const bool pred_pos = pred[i] == positive;
            if (is_pos && pred_pos) ++tp;
            else if (!is_pos && pred_pos) ++fp;
            else if (is_pos && !pred_pos) ++fn;
        }
        const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double denom = 4.0 * precision + recall;
        return denom > 0 ? 5.0 * precision * recall / denom : 0.0;
    };
    return 0.5 * (fbeta_for(Label::Dead) + fbeta_for(Label::Alive));
}

}  // namespace oracle
