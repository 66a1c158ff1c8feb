#include "prognosis/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "prognosis/csv.hpp"
#include "prognosis/rng.hpp"

namespace prognosis {

std::string to_string(Assignment a) { return a == Assignment::Train ? "train" : "test"; }

SplitAssignment stratified_split(const Cohort& records, int boundary_day, double test_fraction,
                                 std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
        throw DatasetError("test fraction must be in [0,1)");
    }
    long long n_dead = 0, n_alive = 0;
    std::map<std::pair<Phase, Label>, std::vector<std::string>> strata;
    for (const auto& r : records) {
        if (r.outcome.excluded()) continue;
        const Label label = *r.outcome.label;
        (label == Label::Dead ? n_dead : n_alive) += 1;
        strata[{assign_phase(r, boundary_day), label}].push_back(r.patient_id);
    }
    if (n_dead < 2 || n_alive < 2) {
        throw DatasetError("stratified split needs at least 2 patients per class");
    }

    SplitAssignment out;
    out.seed = seed;
    int stratum_index = 0;
    for (auto& [key, ids] : strata) {
        // sort then shuffle: the draw depends only on (ids, seed), not on the
        // order records arrived in
        std::sort(ids.begin(), ids.end());
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(stratum_index++)));
        for (std::size_t i = ids.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(i) - 1));
            std::swap(ids[i - 1], ids[j]);
        }
        const auto n_test = static_cast<std::size_t>(
            std::floor(static_cast<double>(ids.size()) * test_fraction + 0.5));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            out.by_patient[ids[i]] = i < n_test ? Assignment::Test : Assignment::Train;
        }
    }
    return out;
}

void write_split(const std::string& path, const SplitAssignment& split) {
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot write split file: " + path);
    out << "patient_id,assignment\n";
    for (const auto& [id, a] : split.by_patient) {
        out << id << ',' << to_string(a) << '\n';
    }
}

SplitAssignment load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open split file: " + path);
    std::string line;
    if (!std::getline(in, line) || csv::join(csv::split_line(line)) != "patient_id,assignment") {
        throw DatasetError(path + ": bad split header");
    }
    SplitAssignment split;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = csv::split_line(line);
        if (f.size() != 2 || (f[1] != "train" && f[1] != "test")) {
            throw DatasetError(path + ":" + std::to_string(line_no) + ": bad split row");
        }
        split.by_patient[f[0]] = f[1] == "train" ? Assignment::Train : Assignment::Test;
    }
    return split;
}

std::vector<DatasetPair> build_day_datasets(const Cohort& records, const SplitAssignment& split,
                                            int boundary_day, Phase phase, FeatureForm form,
                                            const std::vector<DayConfig>& day_configs,
                                            const LabRegistry& registry, double trend_t) {
    std::vector<const PatientRecord*> phase_records;
    for (const auto& r : records) {
        if (r.outcome.excluded()) continue;
        if (assign_phase(r, boundary_day) != phase) continue;
        if (!split.by_patient.count(r.patient_id)) {
            throw DatasetError("split does not cover patient '" + r.patient_id + "'");
        }
        phase_records.push_back(&r);
    }

    std::vector<DatasetPair> out;
    for (DayConfig day : day_configs) {
        DatasetPair pair;
        for (Dataset* d : {&pair.train, &pair.test}) {
            d->day = day;
            d->phase = phase;
            d->form = form;
            d->feature_names = feature_names(registry, day, form);
        }
        for (const auto* r : phase_records) {
            auto snap = build_snapshot(*r, day, form, trend_t, registry);
            if (!snap) continue;  // released or deceased before the snapshot day
            Dataset& side =
                split.by_patient.at(r->patient_id) == Assignment::Train ? pair.train : pair.test;
            side.rows.push_back(std::move(snap->features));
            side.labels.push_back(snap->label);
            side.patient_ids.push_back(r->patient_id);
        }
        if (pair.train.rows.empty() || pair.test.rows.empty()) {
            throw DatasetError("day config '" + to_string(day) + "' for phase " +
                               to_string(phase) + " produced an empty dataset side");
        }
        out.push_back(std::move(pair));
    }
    return out;
}

void write_dataset(const std::string& path, const Dataset& dataset) {
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot write dataset file: " + path);
    out << "patient_id,label";
    for (const auto& name : dataset.feature_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
        out << dataset.patient_ids[i] << ',' << to_string(dataset.labels[i]);
        for (double v : dataset.rows[i]) out << ',' << csv::format_double(v);
        out << '\n';
    }
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DatasetError(path + ": empty dataset file");
    auto header = csv::split_line(line);
    if (header.size() < 3 || header[0] != "patient_id" || header[1] != "label") {
        throw DatasetError(path + ": bad dataset header");
    }
    Dataset d;
    d.feature_names.assign(header.begin() + 2, header.end());
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = csv::split_line(line);
        if (f.size() != header.size()) {
            throw DatasetError(path + ":" + std::to_string(line_no) + ": wrong column count");
        }
        if (f[1] != "dead" && f[1] != "alive") {
            throw DatasetError(path + ":" + std::to_string(line_no) + ": bad label '" + f[1] + "'");
        }
        std::vector<double> row;
        row.reserve(d.feature_names.size());
        for (std::size_t i = 2; i < f.size(); ++i) {
            auto v = csv::parse_double(f[i]);
            if (!v) {
                throw DatasetError(path + ":" + std::to_string(line_no) + ": bad number '" +
                                   f[i] + "'");
            }
            row.push_back(*v);
        }
        d.patient_ids.push_back(f[0]);
        d.labels.push_back(f[1] == "dead" ? Label::Dead : Label::Alive);
        d.rows.push_back(std::move(row));
    }
    return d;
}

}  // namespace prognosis
