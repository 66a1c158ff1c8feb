#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prognosis/evaluation.hpp"
#include "prognosis/search.hpp"
#include "prognosis/synth.hpp"

namespace prognosis {

struct PipelineConfig {
    std::string registry_path;  // empty = built-in defaults
    std::string boundary_date = "2020-03-21";
    double test_fraction = 0.2;
    double trend_t = 0.15;
    std::vector<DayConfig> days = all_day_configs();
    std::vector<FeatureForm> forms{FeatureForm::Numerical, FeatureForm::Categorical};

    int n_configs = 64;           // smoke budget; the reference setting is 4096
    std::optional<int> k_folds;   // auto by default
    double max_u = 0.25;
    int n_thresholds = 100;
    std::string space = "smoke";  // "smoke" | "full"

    // either an existing event file or a synthetic cohort
    std::string input_path;
    int synth_patients = 2000;
    double synth_drift = 2.0;
    double synth_mortality = 0.11;

    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;  // 0 = hardware default

    static PipelineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;  // canonical form, hashed into provenance
    void validate() const;
};

struct PipelineSummaryRow {
    Phase phase;
    DayConfig day;
    std::string model_tag;  // e.g. "RF-N"
    double cv_score = 0.0;
    EvalReport report;
};

struct PipelineResult {
    std::vector<PipelineSummaryRow> rows;
    std::string out_dir;
};

// Runs synth/ingest -> split -> datasets -> per-(phase, day) searches over
// both forms -> winner selection among {RF,ET}x{num,cat} -> evaluation, and
// writes every stage artifact under out_dir. Pure function of (inputs,
// config, seed): reruns produce byte-identical files at any thread count.
PipelineResult run_pipeline(const PipelineConfig& config);

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Checks that every JSON artifact under dir carries a provenance block whose
// config hash matches the run_config.json it sits next to.
// Returns the list of problems; empty means verified.
std::vector<std::string> verify_artifacts(const std::string& dir);

}  // namespace prognosis
