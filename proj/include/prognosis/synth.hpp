#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "prognosis/cohort.hpp"

namespace prognosis {

// Per-test generator knobs. Values are drawn log-normally around the median
// (right-skewed like real lab panels); deceased patients get their log-values
// shifted by `severity_shift`, scaled up as the stay progresses so trends
// carry signal. The X-ray score is drawn on a discrete 0..18 scale instead.
struct TestGenParams {
    double median = 1.0;
    double median_female = -1.0;  // <0: same as median
    double sigma_log = 0.5;
    double mean_gap_days = 3.0;   // expected spacing between measurements
    double p_day0 = 1.0;          // probability the test is taken on admission
    double severity_shift = 0.5;  // log-units; negative for tests that drop when ill
};

struct GeneratorSpec {
    int n_patients = 2000;
    double phase_mix = 0.5;       // fraction of HCP-like admissions
    double drift_factor = 2.0;    // HCP mortality multiplier
    double base_mortality = 0.11; // MCP death rate
    double hcp_stay_median = 8.0;
    double mcp_stay_median = 14.0;
    double stay_sigma_log = 0.55;
    // Concept drift beyond the death rate: in the overwhelmed phase the link
    // between lab values and outcome is weaker, so the same finding maps to a
    // different risk in the two phases.
    double hcp_severity_scale = 0.55;
    double transfer_hospital_rate = 0.05;
    double transfer_rehab_rate = 0.04;
    int boundary_day = 0;  // set from the boundary date; HCP admissions fall before it
    std::map<LabTest, TestGenParams> tests;  // filled by defaults() when empty
    std::uint64_t seed = 0;

    static GeneratorSpec defaults();
};

GeneratorSpec generator_spec_from_json_file(const std::string& path);

// Deterministic under seed: patient i draws everything from the substream
// (seed, i), so any parallel schedule reproduces the serial output.
Cohort generate(const GeneratorSpec& spec);

// Randomly removes events at the given per-test drop rates; a patient always
// keeps at least one event.
Cohort inject_sparsity(Cohort records, const std::map<LabTest, double>& drop_rates,
                       std::uint64_t seed);
Cohort inject_sparsity(Cohort records, double drop_rate, std::uint64_t seed);

}  // namespace prognosis
