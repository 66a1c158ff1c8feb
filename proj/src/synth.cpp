#include "prognosis/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "prognosis/rng.hpp"

namespace prognosis {

GeneratorSpec GeneratorSpec::defaults() {
    GeneratorSpec s;
    s.boundary_day = days_from_civil(2020, 3, 21);
    auto& t = s.tests;
    //                         median  med.F  sigma  gap   p0    shift
    t[LabTest::Pcr]        = {  34.3,  -1.0,  0.90,  1.5,  1.0,  0.90};
    t[LabTest::Ldh]        = { 280.0,  -1.0,  0.50,  3.0,  1.0,  0.45};
    t[LabTest::Ferritin]   = {1030.0, 497.0,  0.80,  7.0,  0.5,  0.50};
    t[LabTest::TroponinT]  = {  19.0,  -1.0,  0.80,  5.0,  0.6,  0.70};
    t[LabTest::Wbc]        = {   7.1,  -1.0,  0.40,  2.0,  1.0,  0.25};
    t[LabTest::DDimer]     = { 553.0,  -1.0,  0.90,  3.0,  0.8,  0.60};
    t[LabTest::Fibrinogen] = { 442.0,  -1.0,  0.35,  4.0,  0.7,  0.20};
    t[LabTest::Lymphocyte] = {   1.0,  -1.0,  0.45,  2.0,  1.0, -0.35};
    t[LabTest::NeutrophilLymphocyteRatio] = {4.9, -1.0, 0.60, 2.0, 1.0, 0.50};
    t[LabTest::XRayScore]  = {   8.0,  -1.0,  3.00,  4.0,  1.0,  4.00};  // absolute scale
    return s;
}

GeneratorSpec generator_spec_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open generator spec: " + path);
    nlohmann::json j;
    in >> j;
    GeneratorSpec s = GeneratorSpec::defaults();
    s.n_patients = j.value("patients", s.n_patients);
    s.phase_mix = j.value("phase_mix", s.phase_mix);
    s.drift_factor = j.value("drift", s.drift_factor);
    s.base_mortality = j.value("mortality", s.base_mortality);
    s.hcp_stay_median = j.value("hcp_stay_median", s.hcp_stay_median);
    s.mcp_stay_median = j.value("mcp_stay_median", s.mcp_stay_median);
    s.hcp_severity_scale = j.value("hcp_severity_scale", s.hcp_severity_scale);
    s.transfer_hospital_rate = j.value("transfer_hospital_rate", s.transfer_hospital_rate);
    s.transfer_rehab_rate = j.value("transfer_rehab_rate", s.transfer_rehab_rate);
    if (j.contains("boundary")) {
        auto b = parse_iso_date(j.at("boundary").get<std::string>());
        if (!b) throw std::runtime_error("generator spec: bad boundary date");
        s.boundary_day = *b;
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

namespace {

// Progress through the stay scales the severity shift: early findings of a
// patient who later dies look closer to normal than the final ones, which
// also gives the trend features something to detect.
double severity_profile(double progress) { return 0.6 + 0.8 * progress; }

double draw_value(LabTest test, const TestGenParams& p, bool dead, Sex sex, double phase_scale,
                  double progress, Rng& rng) {
    if (test == LabTest::XRayScore) {
        double v = p.median + rng.gaussian() * p.sigma_log;
        if (dead) v += p.severity_shift * phase_scale * severity_profile(progress);
        else v -= 0.3 * p.severity_shift * progress;
        return std::clamp(std::round(v), 0.0, 18.0);
    }
    double mu = std::log(sex == Sex::Female && p.median_female > 0 ? p.median_female : p.median);
    if (dead) {
        mu += p.severity_shift * phase_scale * severity_profile(progress);
    } else {
        // mild recovery drift for survivors
        mu -= 0.2 * p.severity_shift * progress;
    }
    const double v = std::exp(mu + rng.gaussian() * p.sigma_log);
    // round to a plausible lab precision; keeps the CSV round-trip tidy
    return std::round(v * 100.0) / 100.0;
}

}  // namespace

Cohort generate(const GeneratorSpec& spec) {
    if (spec.n_patients < 1) throw std::invalid_argument("generator: need at least one patient");
    if (!(spec.phase_mix >= 0.0 && spec.phase_mix <= 1.0)) {
        throw std::invalid_argument("generator: phase_mix must be in [0,1]");
    }
    if (spec.base_mortality * spec.drift_factor > 1.0 || spec.base_mortality < 0.0 ||
        spec.drift_factor < 1.0) {
        throw std::invalid_argument("generator: infeasible mortality specification");
    }
    GeneratorSpec s = spec;
    if (s.tests.empty()) s.tests = GeneratorSpec::defaults().tests;

    Cohort cohort;
    cohort.reserve(static_cast<std::size_t>(s.n_patients));
    for (int i = 0; i < s.n_patients; ++i) {
        Rng rng(derive_seed(s.seed, static_cast<std::uint64_t>(i)));
        PatientRecord r;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "P%06d", i);
        r.patient_id = buf;

        const bool hcp = rng.uniform() < s.phase_mix;
        r.admission_day = hcp ? s.boundary_day - 30 + static_cast<int>(rng.uniform_int(0, 29))
                              : s.boundary_day + static_cast<int>(rng.uniform_int(0, 39));

        r.age = static_cast<int>(std::clamp(std::round(66.0 + 15.0 * rng.gaussian()), 18.0, 99.0));
        r.sex = rng.uniform() < 0.6 ? Sex::Male : Sex::Female;

        // age tilts the death risk; the phase multiplier carries the drift
        const double phase_mortality = s.base_mortality * (hcp ? s.drift_factor : 1.0);
        const double p_death =
            std::min(0.95, phase_mortality * std::pow(static_cast<double>(r.age) / 66.0, 1.5));
        const bool dead = rng.uniform() < p_death;

        const double stay_median = hcp ? s.hcp_stay_median : s.mcp_stay_median;
        const double stay =
            std::exp(std::log(stay_median) + s.stay_sigma_log * rng.gaussian());
        r.stay_length = static_cast<int>(std::clamp(std::round(stay), 1.0, 60.0));

        RawOutcome raw = dead ? RawOutcome::Died : RawOutcome::Released;
        if (!dead && rng.uniform() < s.transfer_rehab_rate) raw = RawOutcome::TransferredRehab;
        if (rng.uniform() < s.transfer_hospital_rate) raw = RawOutcome::TransferredHospital;
        r.outcome = outcome_from_raw(raw);

        const double phase_scale = hcp ? s.hcp_severity_scale : 1.0;
        for (const auto& [test, params] : s.tests) {
            int day;
            if (params.p_day0 >= 1.0 || rng.uniform() < params.p_day0) {
                day = 0;
            } else {
                day = 1 + static_cast<int>(std::floor(rng.exponential(params.mean_gap_days)));
            }
            while (day <= r.stay_length) {
                const double progress =
                    r.stay_length > 1 ? static_cast<double>(day) / (r.stay_length) : 0.0;
                LabEvent e;
                e.test = test;
                e.day = day;
                e.value = draw_value(test, params, dead, r.sex, phase_scale, progress, rng);
                r.events.push_back(e);
                day += 1 + static_cast<int>(std::floor(rng.exponential(
                                std::max(0.0, params.mean_gap_days - 1.0))));
            }
        }
        std::sort(r.events.begin(), r.events.end(), [](const LabEvent& a, const LabEvent& b) {
            if (a.day != b.day) return a.day < b.day;
            return static_cast<int>(a.test) < static_cast<int>(b.test);
        });
        cohort.push_back(std::move(r));
    }
    return cohort;
}

Cohort inject_sparsity(Cohort records, const std::map<LabTest, double>& drop_rates,
                       std::uint64_t seed) {
    for (const auto& [test, rate] : drop_rates) {
        (void)test;
        if (!(rate >= 0.0 && rate < 1.0)) {
            throw std::invalid_argument("sparsity drop rate must be in [0,1)");
        }
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        Rng rng(derive_seed(seed ^ 0x5AD5ull, i));
        auto& r = records[i];
        if (r.events.empty()) continue;
        const std::vector<LabEvent> original = r.events;
        std::vector<LabEvent> kept;
        for (const auto& e : r.events) {
            const auto it = drop_rates.find(e.test);
            const double rate = it == drop_rates.end() ? 0.0 : it->second;
            if (!(rng.uniform() < rate)) kept.push_back(e);
        }
        if (kept.empty()) kept.push_back(original.front());  // floor: one event survives
        r.events = std::move(kept);
    }
    return records;
}

Cohort inject_sparsity(Cohort records, double drop_rate, std::uint64_t seed) {
    std::map<LabTest, double> rates;
    for (LabTest t : all_lab_tests()) rates[t] = drop_rate;
    return inject_sparsity(std::move(records), rates, seed);
}

}  // namespace prognosis
