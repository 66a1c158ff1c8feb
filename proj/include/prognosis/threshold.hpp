#pragma once

#include <functional>
#include <span>
#include <vector>

#include "prognosis/metrics.hpp"

namespace prognosis {

struct ProbabilityPair {
    double alive = 0.0;
    double dead = 0.0;

    double max() const { return alive > dead ? alive : dead; }
    // Ties break toward Dead, the costlier miss.
    Label argmax() const { return dead >= alive ? Label::Dead : Label::Alive; }
};

using ScoreFn = std::function<double(std::span<const Label>, std::span<const Label>)>;

// Macro-F2, the selection metric used everywhere a ScoreFn is needed.
double macro_f2_score(std::span<const Label> truth, std::span<const Label> predicted);

struct ThresholdResult {
    double threshold = 0.0;
    double score = 0.0;
    double rejected_fraction = 0.0;  // achieved on the evaluated samples
};

// Scans n evenly spaced thresholds from min(P_max) upward. A candidate keeps
// the samples whose top-class probability is strictly above it; as soon as a
// candidate would reject at least max_u of the samples the search stops and
// the best pair found so far is returned (larger thresholds can only reject
// more). The score starts from the no-rejection value and is only replaced on
// strict improvement, so the returned threshold is the smallest one achieving
// the returned score.
ThresholdResult find_uncertain_threshold(std::span<const Label> truth,
                                         std::span<const ProbabilityPair> probabilities,
                                         double max_u, int n_thresholds,
                                         const ScoreFn& score = macro_f2_score);

enum class TriageLabel { Alive, Dead, Uncertain };

std::string to_string(TriageLabel l);

struct TriagePrediction {
    TriageLabel label = TriageLabel::Uncertain;
    double p_alive = 0.0;
    double p_dead = 0.0;

    double p_max() const { return p_alive > p_dead ? p_alive : p_dead; }
};

// Uncertain iff the top-class probability does not exceed the threshold,
// mirroring the strict keep rule used during optimization.
TriagePrediction triage(const ProbabilityPair& p, double threshold);

}  // namespace prognosis
