#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prognosis/cohort.hpp"

namespace prognosis {

enum class FeatureForm { Numerical, Categorical };
enum class DayConfig { Day2, Day4, Day6, Day8, Day10, End };

std::string to_string(FeatureForm f);          // "num" / "cat"
std::string to_string(DayConfig d);            // "2" .. "10", "end"
std::optional<FeatureForm> feature_form_from_string(const std::string& s);
std::optional<DayConfig> day_config_from_string(const std::string& s);
std::vector<DayConfig> all_day_configs();

enum class Trend { Increasing, Stable, Decreasing, Missing };

// Numeric encoding used in feature vectors: +1 / 0 / -1, missing = NaN.
double trend_to_feature(Trend t);

struct Finding {
    double value = 0.0;
    int ageing = 0;  // snapshot day minus the day the finding was taken
};

// Latest finding with event day <= day; in first-window mode (day-2 datasets)
// the earliest such finding instead, so the model sees the data available
// right after admission.
std::optional<Finding> most_recent_finding(const PatientRecord& record, LabTest test, int day,
                                           bool first_window_mode);

// v1 is the earlier value. The dead band is +-T relative to v1; boundary
// equality is Stable. A zero v1 makes the multiplicative rule degenerate, so
// the sign of v2 decides.
Trend compute_trend(double v1, double v2, double t_fraction);

// start trend: first available -> most recent finding; last trend:
// penultimate -> last. Both Missing with fewer than two findings in [0, day].
std::pair<Trend, Trend> start_and_last_trends(const PatientRecord& record, LabTest test, int day,
                                              double t_fraction);

// Severity bin: 0 inside the normal range, then one bin per registry
// multiplier over the normal upper bound, top bin above the last multiplier.
int categorize(double value, const LabTestSpec& spec, Sex sex, const LabRegistry& registry);

struct Snapshot {
    std::string patient_id;
    int snapshot_day = 0;
    std::vector<double> features;  // NaN = missing
    Label label = Label::Alive;
};

// Which per-test columns a day config carries.
struct SnapshotSchema {
    bool ageing = false;
    bool start_trend = false;
    bool last_trend = false;
    bool first_window = false;  // day-2: oldest value in the window
};

SnapshotSchema schema_for(DayConfig day);
int snapshot_day_for(DayConfig day, const PatientRecord& record);

// Column names, fixed by (registry order, day config, form); ends with age
// and sex.
std::vector<std::string> feature_names(const LabRegistry& registry, DayConfig day,
                                       FeatureForm form);

// Returns nullopt when the patient left the hospital before the snapshot day.
// Excluded records are a caller error.
std::optional<Snapshot> build_snapshot(const PatientRecord& record, DayConfig day,
                                       FeatureForm form, double t_fraction,
                                       const LabRegistry& registry);

}  // namespace prognosis
