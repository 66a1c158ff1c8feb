#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "prognosis/synth.hpp"

using namespace prognosis;

TEST_CASE("generator rejects infeasible specs") {
    GeneratorSpec spec = GeneratorSpec::defaults();
    spec.base_mortality = 0.6;
    spec.drift_factor = 2.0;  // 1.2 > 1
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
    spec = GeneratorSpec::defaults();
    spec.n_patients = 0;
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
}

TEST_CASE("fixed seed reproduces a byte-identical cohort file") {
    GeneratorSpec spec = GeneratorSpec::defaults();
    spec.n_patients = 150;
    spec.seed = 99;
    const auto p1 = (std::filesystem::temp_directory_path() / "synth_a.csv").string();
    const auto p2 = (std::filesystem::temp_directory_path() / "synth_b.csv").string();
    write_cohort(p1, generate(spec));
    write_cohort(p2, generate(spec));
    std::ifstream f1(p1), f2(p2);
    const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    CHECK(!s1.empty());
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("generated cohorts pass ingestion with zero rejected rows") {
    GeneratorSpec spec = GeneratorSpec::defaults();
    spec.n_patients = 400;
    spec.seed = 7;
    const auto path = (std::filesystem::temp_directory_path() / "synth_clean.csv").string();
    write_cohort(path, generate(spec));
    const auto report = ingest_cohort(path, LabRegistry::defaults());
    CHECK(report.rejected_rows.empty());
    CHECK(report.warnings.empty());
    CHECK(report.records.size() == 400);
    std::filesystem::remove(path);
}

TEST_CASE("mortality calibration: drift 2.0 doubles the HCP death rate") {
    GeneratorSpec spec = GeneratorSpec::defaults();
    spec.n_patients = 1000;
    spec.drift_factor = 2.0;
    spec.base_mortality = 0.11;

    double hcp_sum = 0.0, ratio_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        spec.seed = seed;
        const auto stats = cohort_stats(generate(spec), spec.boundary_day);
        hcp_sum += stats.hcp.mortality_rate;
        ratio_sum += stats.hcp.mortality_rate / stats.mcp.mortality_rate;
    }
    const double hcp_mean = hcp_sum / 10.0;
    const double ratio_mean = ratio_sum / 10.0;
    CHECK(hcp_mean > 0.18);
    CHECK(hcp_mean < 0.26);  // target 0.22
    CHECK(ratio_mean > 1.6);
    CHECK(ratio_mean < 2.4);  // about twice, +-20%
}

TEST_CASE("stay medians land near 8 (HCP) and 14 (MCP) days") {
    GeneratorSpec spec = GeneratorSpec::defaults();
    spec.n_patients = 4000;
    spec.seed = 5;
    const auto stats = cohort_stats(generate(spec), spec.boundary_day);
    CHECK(stats.hcp.median_stay == doctest::Approx(8.0).epsilon(0.25));
    CHECK(stats.mcp.median_stay == doctest::Approx(14.0).epsilon(0.25));
}

TEST_CASE("PCR median of generated values stays within 25% of 34.3") {
    GeneratorSpec spec = GeneratorSpec::defaults();
    spec.n_patients = 1500;
    spec.seed = 12;
    const auto stats = cohort_stats(generate(spec), spec.boundary_day);
    const double med = stats.overall.median_values.at(LabTest::Pcr);
    CHECK(med > 34.3 * 0.75);
    CHECK(med < 34.3 * 1.25);
}

TEST_CASE("drift ratio converges to the knob at n=5000") {
    GeneratorSpec spec = GeneratorSpec::defaults();
    spec.n_patients = 5000;
    double ratio_sum = 0.0;
    for (std::uint64_t seed = 21; seed <= 23; ++seed) {
        spec.seed = seed;
        const auto stats = cohort_stats(generate(spec), spec.boundary_day);
        ratio_sum += stats.hcp.mortality_rate / stats.mcp.mortality_rate;
    }
    CHECK(ratio_sum / 3.0 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("deceased values dominate survivor values for severity-positive tests") {
    GeneratorSpec spec = GeneratorSpec::defaults();
    spec.n_patients = 800;
    spec.seed = 3;
    const Cohort cohort = generate(spec);
    for (LabTest test : {LabTest::Pcr, LabTest::Ldh, LabTest::DDimer,
                         LabTest::NeutrophilLymphocyteRatio, LabTest::XRayScore}) {
        std::vector<double> scores;
        std::vector<Label> labels;
        for (const auto& r : cohort) {
            if (r.outcome.excluded()) continue;
            for (const auto& e : r.events) {
                if (e.test != test) continue;
                scores.push_back(e.value);
                labels.push_back(*r.outcome.label);
            }
        }
        const double auc = oracle::pairwise_auc(scores, labels);
        CHECK(auc > 0.55);  // rank-sum direction
    }
    // lymphocytes run the other way
    std::vector<double> scores;
    std::vector<Label> labels;
    for (const auto& r : cohort) {
        if (r.outcome.excluded()) continue;
        for (const auto& e : r.events) {
            if (e.test != LabTest::Lymphocyte) continue;
            scores.push_back(e.value);
            labels.push_back(*r.outcome.label);
        }
    }
    CHECK(oracle::pairwise_auc(scores, labels) < 0.45);
}

TEST_CASE("inject_sparsity: identity at 0, halves at 0.5, keeps lone events") {
    GeneratorSpec spec = GeneratorSpec::defaults();
    spec.n_patients = 200;

    std::size_t before_total = 0, after_total = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        spec.seed = seed;
        const Cohort cohort = generate(spec);
        for (const auto& r : cohort) before_total += r.events.size();

        const Cohort untouched = inject_sparsity(cohort, 0.0, seed);
        std::size_t untouched_total = 0;
        for (const auto& r : untouched) untouched_total += r.events.size();
        std::size_t original_total = 0;
        for (const auto& r : cohort) original_total += r.events.size();
        REQUIRE(untouched_total == original_total);

        const Cohort halved = inject_sparsity(cohort, 0.5, seed);
        for (const auto& r : halved) {
            after_total += r.events.size();
            REQUIRE(!r.events.empty());  // floor rule
        }
    }
    const double kept = static_cast<double>(after_total) / static_cast<double>(before_total);
    CHECK(kept > 0.45);
    CHECK(kept < 0.55);

    // a single-event patient survives even at a high drop rate
    Cohort one;
    PatientRecord r;
    r.patient_id = "p";
    r.age = 60;
    r.sex = Sex::Male;
    r.admission_day = 18000;
    r.stay_length = 5;
    r.events = {{LabTest::Pcr, 30.0, 0}};
    r.outcome = outcome_from_raw(RawOutcome::Released);
    one.push_back(r);
    const Cohort kept_one = inject_sparsity(one, 0.95, 4);
    CHECK(kept_one[0].events.size() == 1);

    CHECK_THROWS_AS(inject_sparsity(one, 1.0, 4), std::invalid_argument);
}
