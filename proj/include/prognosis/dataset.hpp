#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prognosis/snapshot.hpp"

namespace prognosis {

struct Dataset {
    DayConfig day = DayConfig::Day2;
    std::optional<Phase> phase;
    FeatureForm form = FeatureForm::Numerical;
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;  // NaN = missing
    std::vector<Label> labels;
    std::vector<std::string> patient_ids;

    std::size_t size() const { return rows.size(); }
    int width() const { return static_cast<int>(feature_names.size()); }
};

enum class Assignment { Train, Test };

std::string to_string(Assignment a);

struct SplitAssignment {
    std::map<std::string, Assignment> by_patient;
    std::uint64_t seed = 0;
};

// One-time stratified patient split shared by every day config. Strata are
// (phase, label) cells so both phases keep their class balance; per-stratum
// test counts round half up.
SplitAssignment stratified_split(const Cohort& records, int boundary_day, double test_fraction,
                                 std::uint64_t seed);

void write_split(const std::string& path, const SplitAssignment& split);
SplitAssignment load_split(const std::string& path);

struct DatasetPair {
    Dataset train;
    Dataset test;
};

// Builds the (train, test) pair for every requested day config of one phase.
// Day-d datasets carry exactly the phase patients hospitalized past day d;
// the end-day dataset carries them all.
std::vector<DatasetPair> build_day_datasets(const Cohort& records, const SplitAssignment& split,
                                            int boundary_day, Phase phase, FeatureForm form,
                                            const std::vector<DayConfig>& day_configs,
                                            const LabRegistry& registry, double trend_t);

// Dataset CSV: patient_id,label,<feature columns>; missing cells are empty.
void write_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace prognosis
