#pragma once

#include <optional>
#include <string>

#include "prognosis/forest.hpp"
#include "prognosis/metrics.hpp"

namespace prognosis {

struct ViewMetrics {
    double f2_dead = 0.0;
    double f2_alive = 0.0;
    double macro_f2 = 0.0;
    std::optional<double> roc_auc;  // absent when the view holds one class only
    ConfusionMatrix confusion;
};

struct EvalReport {
    std::string phase;  // "hcp" / "mcp" / "" when standalone
    std::string day;    // "2".."10", "end"
    std::string form;   // "num" / "cat"
    std::size_t n_samples = 0;
    double uncertain_fraction = 0.0;
    ViewMetrics complete;       // every sample scored by raw argmax
    ViewMetrics no_uncertain;   // rejected samples omitted
};

// Scores the model twice: over all samples (uncertain ones fall back to their
// argmax label) and over the samples whose top probability clears the
// attached threshold. ROC-AUC always uses the raw death probabilities.
EvalReport evaluate(const Forest& forest, const Dataset& test, int n_threads = 1);

void write_report_json(const std::string& path, const EvalReport& report,
                       const Provenance& provenance);
EvalReport load_report_json(const std::string& path, Provenance* provenance = nullptr);

// Human rendering: one table per view, correct predictions on the main
// diagonal of each confusion matrix.
void write_report_markdown(const std::string& path, const EvalReport& report);
std::string report_markdown(const EvalReport& report);

}  // namespace prognosis
