#include "prognosis/snapshot.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace prognosis {

namespace {
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(FeatureForm f) { return f == FeatureForm::Numerical ? "num" : "cat"; }

std::string to_string(DayConfig d) {
    switch (d) {
        case DayConfig::Day2: return "2";
        case DayConfig::Day4: return "4";
        case DayConfig::Day6: return "6";
        case DayConfig::Day8: return "8";
        case DayConfig::Day10: return "10";
        case DayConfig::End: return "end";
    }
    return "?";
}

std::optional<FeatureForm> feature_form_from_string(const std::string& s) {
    if (s == "num") return FeatureForm::Numerical;
    if (s == "cat") return FeatureForm::Categorical;
    return std::nullopt;
}

std::optional<DayConfig> day_config_from_string(const std::string& s) {
    for (DayConfig d : all_day_configs()) {
        if (to_string(d) == s) return d;
    }
    return std::nullopt;
}

std::vector<DayConfig> all_day_configs() {
    return {DayConfig::Day2, DayConfig::Day4, DayConfig::Day6,
            DayConfig::Day8, DayConfig::Day10, DayConfig::End};
}

double trend_to_feature(Trend t) {
    switch (t) {
        case Trend::Increasing: return 1.0;
        case Trend::Stable: return 0.0;
        case Trend::Decreasing: return -1.0;
        case Trend::Missing: return kMissing;
    }
    return kMissing;
}

std::optional<Finding> most_recent_finding(const PatientRecord& record, LabTest test, int day,
                                           bool first_window_mode) {
    std::optional<Finding> found;
    for (const auto& e : record.events) {  // events sorted by day
        if (e.test != test || e.day > day) continue;
        if (!found || !first_window_mode) found = Finding{e.value, day - e.day};
    }
    return found;
}

Trend compute_trend(double v1, double v2, double t_fraction) {
    if (!(t_fraction > 0.0 && t_fraction < 1.0)) {
        throw std::invalid_argument("trend threshold must be in (0,1)");
    }
    if (v1 == 0.0) return v2 > 0.0 ? Trend::Increasing : Trend::Stable;
    // The band edges are decimal quantities; a relative guard keeps values
    // sitting exactly on an edge (e.g. 115 vs 100 at 15%) classified Stable
    // despite binary rounding of (1 +- T) * v1.
    const double up = (1.0 + t_fraction) * v1;
    const double down = (1.0 - t_fraction) * v1;
    const double guard = 1e-12 * std::abs(v1);
    if (v2 > up + guard) return Trend::Increasing;
    if (v2 < down - guard) return Trend::Decreasing;
    return Trend::Stable;
}

std::pair<Trend, Trend> start_and_last_trends(const PatientRecord& record, LabTest test, int day,
                                              double t_fraction) {
    std::vector<double> values;  // ordered by day; one value per day after dedup
    for (const auto& e : record.events) {
        if (e.test == test && e.day <= day) values.push_back(e.value);
    }
    if (values.size() < 2) return {Trend::Missing, Trend::Missing};
    const Trend start = compute_trend(values.front(), values.back(), t_fraction);
    const Trend last =
        compute_trend(values[values.size() - 2], values.back(), t_fraction);
    return {start, last};
}

int categorize(double value, const LabTestSpec& spec, Sex sex, const LabRegistry& registry) {
    const NormalRange& range = registry.range_for(spec.id, sex);
    // Below-normal values are not graded by the severity multipliers; they
    // fall into the normal bin.
    if (range.contains(value) || (range.lower && value < *range.lower)) return 0;
    const double upper = *range.upper;
    for (std::size_t i = 0; i < spec.bin_multipliers.size(); ++i) {
        if (value <= spec.bin_multipliers[i] * upper) return static_cast<int>(i) + 1;
    }
    return static_cast<int>(spec.bin_multipliers.size()) + 1;
}

SnapshotSchema schema_for(DayConfig day) {
    switch (day) {
        case DayConfig::Day2: return {false, false, false, true};
        case DayConfig::Day4:
        case DayConfig::Day6: return {true, true, false, false};
        case DayConfig::Day8:
        case DayConfig::Day10: return {true, false, true, false};
        case DayConfig::End: return {true, true, true, false};
    }
    return {};
}

int snapshot_day_for(DayConfig day, const PatientRecord& record) {
    switch (day) {
        case DayConfig::Day2: return 2;
        case DayConfig::Day4: return 4;
        case DayConfig::Day6: return 6;
        case DayConfig::Day8: return 8;
        case DayConfig::Day10: return 10;
        case DayConfig::End: return record.stay_length - 1;  // last day before release
    }
    return 0;
}

std::vector<std::string> feature_names(const LabRegistry& registry, DayConfig day,
                                       FeatureForm form) {
    const SnapshotSchema schema = schema_for(day);
    std::vector<std::string> names;
    for (const auto& spec : registry.tests()) {
        const std::string id = to_string(spec.id);
        names.push_back(id + (form == FeatureForm::Categorical ? "_bin" : "_value"));
        if (schema.ageing) names.push_back(id + "_ageing");
        if (schema.start_trend) names.push_back(id + "_start_trend");
        if (schema.last_trend) names.push_back(id + "_last_trend");
    }
    names.push_back("age");
    names.push_back("sex");
    return names;
}

std::optional<Snapshot> build_snapshot(const PatientRecord& record, DayConfig day,
                                       FeatureForm form, double t_fraction,
                                       const LabRegistry& registry) {
    if (record.outcome.excluded()) {
        throw std::invalid_argument("cannot build a snapshot for an excluded record: " +
                                    record.patient_id);
    }
    const int snap_day = snapshot_day_for(day, record);
    if (day != DayConfig::End && record.stay_length <= snap_day) return std::nullopt;

    const SnapshotSchema schema = schema_for(day);
    Snapshot s;
    s.patient_id = record.patient_id;
    s.snapshot_day = snap_day;
    s.label = *record.outcome.label;
    s.features.reserve(feature_names(registry, day, form).size());

    for (const auto& spec : registry.tests()) {
        const auto finding = most_recent_finding(record, spec.id, snap_day, schema.first_window);
        if (finding) {
            const double v = form == FeatureForm::Categorical
                                 ? static_cast<double>(
                                       categorize(finding->value, spec, record.sex, registry))
                                 : finding->value;
            s.features.push_back(v);
            if (schema.ageing) s.features.push_back(static_cast<double>(finding->ageing));
        } else {
            s.features.push_back(kMissing);
            if (schema.ageing) s.features.push_back(kMissing);
        }
        if (schema.start_trend || schema.last_trend) {
            const auto [start, last] = start_and_last_trends(record, spec.id, snap_day, t_fraction);
            if (schema.start_trend) s.features.push_back(trend_to_feature(start));
            if (schema.last_trend) s.features.push_back(trend_to_feature(last));
        }
    }
    s.features.push_back(static_cast<double>(record.age));
    s.features.push_back(record.sex == Sex::Male ? 1.0 : 0.0);
    return s;
}

}  // namespace prognosis
