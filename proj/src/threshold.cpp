#include "prognosis/threshold.hpp"

#include <algorithm>
#include <stdexcept>

namespace prognosis {

double macro_f2_score(std::span<const Label> truth, std::span<const Label> predicted) {
    return macro_f2(truth, predicted);
}

ThresholdResult find_uncertain_threshold(std::span<const Label> truth,
                                         std::span<const ProbabilityPair> probabilities,
                                         double max_u, int n_thresholds,
                                         const ScoreFn& score) {
    const std::size_t n = truth.size();
    if (n == 0 || probabilities.size() != n) {
        throw std::invalid_argument("find_uncertain_threshold: empty or mismatched input");
    }
    if (!(max_u > 0.0 && max_u < 1.0)) {
        throw std::invalid_argument("find_uncertain_threshold: max_u must be in (0,1)");
    }
    if (n_thresholds < 1) {
        throw std::invalid_argument("find_uncertain_threshold: need at least one threshold");
    }

    std::vector<Label> predicted(n);
    std::vector<double> p_max(n);
    for (std::size_t i = 0; i < n; ++i) {
        predicted[i] = probabilities[i].argmax();
        p_max[i] = probabilities[i].max();
    }

    const auto [lo_it, hi_it] = std::minmax_element(p_max.begin(), p_max.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double delta = (hi - lo) / n_thresholds;  // 0 when all p_max agree

    double best_score = score(truth, predicted);
    double best_threshold = lo;

    auto rejected_at = [&](double th) {
        std::size_t kept = 0;
        for (double p : p_max) {
            if (p > th) ++kept;
        }
        return 1.0 - static_cast<double>(kept) / n;
    };

    std::vector<Label> kept_truth, kept_pred;
    kept_truth.reserve(n);
    kept_pred.reserve(n);
    for (int i = 0; i < n_thresholds; ++i) {
        const double candidate = lo + i * delta;
        kept_truth.clear();
        kept_pred.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (p_max[j] > candidate) {  // strictly above: ties get rejected
                kept_truth.push_back(truth[j]);
                kept_pred.push_back(predicted[j]);
            }
        }
        const double u = 1.0 - static_cast<double>(kept_truth.size()) / n;
        if (u >= max_u) {
            return {best_threshold, best_score, rejected_at(best_threshold)};
        }
        const double candidate_score = score(kept_truth, kept_pred);
        if (candidate_score > best_score) {
            best_score = candidate_score;
            best_threshold = candidate;
        }
    }
    return {best_threshold, best_score, rejected_at(best_threshold)};
}

std::string to_string(TriageLabel l) {
    switch (l) {
        case TriageLabel::Alive: return "alive";
        case TriageLabel::Dead: return "dead";
        case TriageLabel::Uncertain: return "uncertain";
    }
    return "?";
}

TriagePrediction triage(const ProbabilityPair& p, double threshold) {
    TriagePrediction out;
    out.p_alive = p.alive;
    out.p_dead = p.dead;
    if (p.max() <= threshold) {
        out.label = TriageLabel::Uncertain;
    } else {
        out.label = p.argmax() == Label::Dead ? TriageLabel::Dead : TriageLabel::Alive;
    }
    return out;
}

}  // namespace prognosis
