#include "prognosis/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace prognosis {

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted) {
    if (truth.size() != predicted.size()) {
        throw std::invalid_argument("confusion: label vectors differ in length");
    }
    ConfusionMatrix m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool dead = truth[i] == Label::Dead;
        const bool pred_dead = predicted[i] == Label::Dead;
        if (dead && pred_dead) ++m.tp;
        else if (!dead && pred_dead) ++m.fp;
        else if (dead && !pred_dead) ++m.fn;
        else ++m.tn;
    }
    return m;
}

double f_beta(double precision, double recall, double beta) {
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    if (denom == 0.0) return 0.0;
    return (1.0 + b2) * precision * recall / denom;
}

double f_beta_for_class(const ConfusionMatrix& m, Label positive, double beta) {
    long long tp, fp, fn;
    if (positive == Label::Dead) {
        tp = m.tp; fp = m.fp; fn = m.fn;
    } else {
        tp = m.tn; fp = m.fn; fn = m.fp;
    }
    const double precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    return f_beta(precision, recall, beta);
}

double macro_f2(std::span<const Label> truth, std::span<const Label> predicted) {
    const ConfusionMatrix m = confusion(truth, predicted);
    return 0.5 * (f_beta_for_class(m, Label::Dead, 2.0) +
                  f_beta_for_class(m, Label::Alive, 2.0));
}

double roc_auc(std::span<const double> scores, std::span<const Label> labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("roc_auc: size mismatch");
    }
    const std::size_t n = scores.size();
    long long n_pos = 0;
    for (auto l : labels) {
        if (l == Label::Dead) ++n_pos;
    }
    const long long n_neg = static_cast<long long>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("roc_auc: needs at least one sample of each class");
    }

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks over tied scores, then the rank-sum statistic
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[idx[k]] == Label::Dead) rank_sum_pos += avg_rank;
        }
        i = j + 1;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace prognosis
