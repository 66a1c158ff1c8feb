#pragma once

#include <span>
#include <vector>

#include "prognosis/cohort.hpp"

namespace prognosis {

// Dead is the positive class throughout: a false negative is a patient whose
// death risk the system failed to flag.
struct ConfusionMatrix {
    long long tp = 0;  // dead predicted dead
    long long fp = 0;  // alive predicted dead
    long long fn = 0;  // dead predicted alive
    long long tn = 0;  // alive predicted alive

    long long total() const { return tp + fp + fn + tn; }
};

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted);

// Standard F-beta; 0 when the denominator vanishes.
double f_beta(double precision, double recall, double beta);

double f_beta_for_class(const ConfusionMatrix& m, Label positive, double beta);

// Unweighted mean of the per-class F2 scores.
double macro_f2(std::span<const Label> truth, std::span<const Label> predicted);

// Rank-based (Mann-Whitney) estimator of P(score_dead > score_alive), ties at
// half credit. scores are the predicted death probabilities.
double roc_auc(std::span<const double> scores, std::span<const Label> labels);

}  // namespace prognosis
