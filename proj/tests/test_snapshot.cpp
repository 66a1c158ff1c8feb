#include <doctest.h>

#include <cmath>

#include "prognosis/rng.hpp"
#include "prognosis/snapshot.hpp"

using namespace prognosis;

namespace {

PatientRecord patient_with(std::vector<LabEvent> events, int stay = 30) {
    PatientRecord r;
    r.patient_id = "p";
    r.age = 60;
    r.sex = Sex::Male;
    r.admission_day = 18000;
    r.stay_length = stay;
    r.outcome = outcome_from_raw(RawOutcome::Released);
    r.events = std::move(events);
    return r;
}

}  // namespace

TEST_CASE("most_recent_finding picks latest, or earliest in first-window mode") {
    const auto rec = patient_with({{LabTest::Pcr, 40.0, 1}, {LabTest::Pcr, 20.0, 5}});
    auto latest = most_recent_finding(rec, LabTest::Pcr, 6, false);
    REQUIRE(latest.has_value());
    CHECK(latest->value == 20.0);
    CHECK(latest->ageing == 1);

    const auto rec2 = patient_with({{LabTest::Pcr, 40.0, 0}, {LabTest::Pcr, 30.0, 1}});
    auto first = most_recent_finding(rec2, LabTest::Pcr, 2, true);
    REQUIRE(first.has_value());
    CHECK(first->value == 40.0);
    CHECK(first->ageing == 2);

    CHECK(!most_recent_finding(rec, LabTest::Ferritin, 6, false).has_value());
    // events after the snapshot day are invisible
    CHECK(most_recent_finding(rec, LabTest::Pcr, 3, false)->value == 40.0);
}

TEST_CASE("compute_trend applies the 15% dead band with strict inequalities") {
    CHECK(compute_trend(100.0, 120.0, 0.15) == Trend::Increasing);  // 120 > 115
    CHECK(compute_trend(100.0, 115.0, 0.15) == Trend::Stable);      // boundary
    CHECK(compute_trend(100.0, 80.0, 0.15) == Trend::Decreasing);   // 80 < 85
    CHECK(compute_trend(100.0, 85.0, 0.15) == Trend::Stable);       // boundary
    // zero baseline falls back to the sign rule
    CHECK(compute_trend(0.0, 5.0, 0.15) == Trend::Increasing);
    CHECK(compute_trend(0.0, 0.0, 0.15) == Trend::Stable);
    CHECK_THROWS_AS(compute_trend(1.0, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("property: trend anti-symmetry under value exchange") {
    Rng rng(314);
    for (int trial = 0; trial < 500; ++trial) {
        const double a = rng.uniform() * 200.0;
        const double b = rng.uniform() * 200.0;
        const double t = 0.05 + rng.uniform() * 0.4;
        if (compute_trend(a, b, t) == Trend::Increasing) {
            const Trend back = compute_trend(b, a, t);
            REQUIRE((back == Trend::Decreasing || back == Trend::Stable));
            if (!(a >= (1.0 - t) * b)) REQUIRE(back == Trend::Decreasing);
        }
    }
}

TEST_CASE("start and last trends from the finding sequence") {
    const auto rec = patient_with(
        {{LabTest::Pcr, 10.0, 0}, {LabTest::Pcr, 30.0, 3}, {LabTest::Pcr, 31.0, 5}});
    const auto [start, last] = start_and_last_trends(rec, LabTest::Pcr, 6, 0.15);
    CHECK(start == Trend::Increasing);  // 10 -> 31
    CHECK(last == Trend::Stable);       // 30 -> 31

    const auto rec1 = patient_with({{LabTest::Pcr, 10.0, 0}});
    const auto [s1, l1] = start_and_last_trends(rec1, LabTest::Pcr, 6, 0.15);
    CHECK(s1 == Trend::Missing);
    CHECK(l1 == Trend::Missing);

    // two findings: start == last
    const auto rec2 = patient_with({{LabTest::Pcr, 10.0, 0}, {LabTest::Pcr, 30.0, 4}});
    const auto [s2, l2] = start_and_last_trends(rec2, LabTest::Pcr, 6, 0.15);
    CHECK(s2 == l2);

    // findings beyond the window don't count
    const auto [s3, l3] = start_and_last_trends(rec, LabTest::Pcr, 1, 0.15);
    CHECK(s3 == Trend::Missing);
}

TEST_CASE("categorize: the D-dimer severity ladder") {
    const auto registry = LabRegistry::defaults();
    const auto& dd = registry.spec(LabTest::DDimer);
    CHECK(categorize(250.0, dd, Sex::Male, registry) == 0);
    CHECK(categorize(553.0, dd, Sex::Male, registry) == 2);   // 500 < 553 <= 1000
    CHECK(categorize(2600.0, dd, Sex::Male, registry) == 5);  // > 10 * 250
    CHECK(categorize(300.0, dd, Sex::Male, registry) == 1);
    CHECK(categorize(1400.0, dd, Sex::Male, registry) == 3);
    CHECK(categorize(2400.0, dd, Sex::Male, registry) == 4);
}

TEST_CASE("categorize: sex-dependent ferritin bound and below-range values") {
    const auto registry = LabRegistry::defaults();
    const auto& ferritin = registry.spec(LabTest::Ferritin);
    CHECK(categorize(300.0, ferritin, Sex::Male, registry) == 0);    // inside [30,400]
    CHECK(categorize(300.0, ferritin, Sex::Female, registry) == 1);  // 150 < 300 <= 300
    CHECK(categorize(5.0, ferritin, Sex::Male, registry) == 0);      // below range -> normal bin
    const auto& xray = registry.spec(LabTest::XRayScore);
    CHECK(categorize(6.9, xray, Sex::Male, registry) == 0);
    CHECK(categorize(7.0, xray, Sex::Male, registry) == 1);  // exclusive upper bound
}

TEST_CASE("property: categorize is monotone in the value") {
    const auto registry = LabRegistry::defaults();
    Rng rng(99);
    for (const auto& spec : registry.tests()) {
        for (Sex sex : {Sex::Male, Sex::Female}) {
            double prev_value = 0.0;
            int prev_bin = categorize(0.0, spec, sex, registry);
            for (int step = 0; step < 200; ++step) {
                const double v = prev_value + rng.uniform() * 50.0;
                const int bin = categorize(v, spec, sex, registry);
                REQUIRE(bin >= prev_bin);
                prev_value = v;
                prev_bin = bin;
            }
        }
    }
}

TEST_CASE("snapshot widths per day config: 12 / 32 / 42") {
    const auto registry = LabRegistry::defaults();
    CHECK(feature_names(registry, DayConfig::Day2, FeatureForm::Numerical).size() == 12);
    CHECK(feature_names(registry, DayConfig::Day6, FeatureForm::Numerical).size() == 32);
    CHECK(feature_names(registry, DayConfig::Day8, FeatureForm::Numerical).size() == 32);
    CHECK(feature_names(registry, DayConfig::End, FeatureForm::Numerical).size() == 42);

    const auto rec = patient_with({{LabTest::Pcr, 40.0, 0}, {LabTest::Pcr, 38.0, 1}});
    for (DayConfig day : all_day_configs()) {
        const auto snap = build_snapshot(rec, day, FeatureForm::Numerical, 0.15, registry);
        REQUIRE(snap.has_value());
        REQUIRE(snap->features.size() == feature_names(registry, day, FeatureForm::Numerical).size());
    }
}

TEST_CASE("day-2 snapshots use the first window and carry no ageing/trend") {
    const auto registry = LabRegistry::defaults();
    const auto rec = patient_with({{LabTest::Pcr, 40.0, 0}, {LabTest::Pcr, 20.0, 2}});
    const auto snap = build_snapshot(rec, DayConfig::Day2, FeatureForm::Numerical, 0.15, registry);
    REQUIRE(snap.has_value());
    CHECK(snap->features[0] == 40.0);  // oldest value, not the day-2 one
    CHECK(snap->features.size() == 12);
}

TEST_CASE("snapshots skip discharged patients and reject excluded records") {
    const auto registry = LabRegistry::defaults();
    auto rec = patient_with({{LabTest::Pcr, 40.0, 0}}, /*stay=*/5);
    CHECK(build_snapshot(rec, DayConfig::Day4, FeatureForm::Numerical, 0.15, registry).has_value());
    CHECK(!build_snapshot(rec, DayConfig::Day6, FeatureForm::Numerical, 0.15, registry).has_value());
    CHECK(build_snapshot(rec, DayConfig::End, FeatureForm::Numerical, 0.15, registry).has_value());

    rec.outcome = outcome_from_raw(RawOutcome::TransferredHospital);
    CHECK_THROWS_AS(build_snapshot(rec, DayConfig::Day4, FeatureForm::Numerical, 0.15, registry),
                    std::invalid_argument);
}

TEST_CASE("end-day snapshot sees only events before the release day") {
    const auto registry = LabRegistry::defaults();
    const auto rec = patient_with({{LabTest::Pcr, 10.0, 0}, {LabTest::Pcr, 99.0, 5}}, /*stay=*/5);
    const auto snap = build_snapshot(rec, DayConfig::End, FeatureForm::Numerical, 0.15, registry);
    REQUIRE(snap.has_value());
    CHECK(snap->snapshot_day == 4);
    CHECK(snap->features[0] == 10.0);  // the day-5 event is outside the window
}

TEST_CASE("property: paired missingness and identical patterns across forms") {
    const auto registry = LabRegistry::defaults();
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<LabEvent> events;
        for (LabTest t : all_lab_tests()) {
            const int n = static_cast<int>(rng.uniform_int(0, 3));
            for (int i = 0; i < n; ++i) {
                double v = rng.uniform() * 100.0;
                if (t == LabTest::XRayScore) v = std::round(std::fmod(v, 18.0));
                events.push_back({t, v, static_cast<int>(rng.uniform_int(0, 12))});
            }
        }
        auto rec = patient_with(std::move(events), 14);
        std::sort(rec.events.begin(), rec.events.end(), [](const auto& a, const auto& b) {
            if (a.day != b.day) return a.day < b.day;
            return static_cast<int>(a.test) < static_cast<int>(b.test);
        });
        for (DayConfig day : all_day_configs()) {
            const auto names = feature_names(registry, day, FeatureForm::Numerical);
            const auto num = build_snapshot(rec, day, FeatureForm::Numerical, 0.15, registry);
            const auto cat = build_snapshot(rec, day, FeatureForm::Categorical, 0.15, registry);
            REQUIRE(num.has_value());
            REQUIRE(cat.has_value());
            for (std::size_t i = 0; i < names.size(); ++i) {
                // identical missingness in both forms
                REQUIRE(std::isnan(num->features[i]) == std::isnan(cat->features[i]));
            }
            // value missing <=> ageing missing
            const auto schema = schema_for(day);
            if (schema.ageing) {
                std::size_t col = 0;
                for (const auto& spec : registry.tests()) {
                    (void)spec;
                    const bool value_missing = std::isnan(num->features[col]);
                    const bool ageing_missing = std::isnan(num->features[col + 1]);
                    REQUIRE(value_missing == ageing_missing);
                    col += 2 + schema.start_trend + schema.last_trend;
                }
            }
        }
    }
}
