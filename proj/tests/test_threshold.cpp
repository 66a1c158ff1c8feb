#include <doctest.h>

#include "oracles.hpp"
#include "prognosis/rng.hpp"
#include "prognosis/threshold.hpp"

using namespace prognosis;

namespace {

const std::vector<Label> kFixtureLabels{Label::Alive, Label::Alive, Label::Dead, Label::Dead};
const std::vector<ProbabilityPair> kFixtureProbs{
    {0.9, 0.1}, {0.45, 0.55}, {0.4, 0.6}, {0.05, 0.95}};

struct RandomInstance {
    std::vector<Label> labels;
    std::vector<ProbabilityPair> probs;
    double max_u;
    int n;
};

RandomInstance random_instance(Rng& rng, int max_size, int max_grid) {
    RandomInstance inst;
    const int n = static_cast<int>(rng.uniform_int(1, max_size));
    for (int i = 0; i < n; ++i) {
        inst.labels.push_back(rng.bernoulli(0.4) ? Label::Dead : Label::Alive);
        // coarse grid sometimes, to exercise ties in p_max
        double p = rng.bernoulli(0.5) ? rng.uniform()
                                      : static_cast<double>(rng.uniform_int(0, 10)) / 10.0;
        inst.probs.push_back({1.0 - p, p});
    }
    inst.max_u = 0.01 + 0.98 * rng.uniform();
    inst.n = static_cast<int>(rng.uniform_int(1, max_grid));
    return inst;
}

}  // namespace

TEST_CASE("fixture: no-rejection macro F2 comes out at 0.7323") {
    std::vector<Label> pred;
    for (const auto& p : kFixtureProbs) pred.push_back(p.argmax());
    CHECK(macro_f2_score(kFixtureLabels, pred) == doctest::Approx(0.73232323).epsilon(1e-6));
    CHECK(oracle::macro_f2_recount(kFixtureLabels, pred) ==
          doctest::Approx(0.73232323).epsilon(1e-6));
}

TEST_CASE("fixture: threshold search lands on (1.0, 0.55)") {
    const auto r = find_uncertain_threshold(kFixtureLabels, kFixtureProbs, 0.3, 10);
    CHECK(r.score == doctest::Approx(1.0));
    CHECK(r.threshold == doctest::Approx(0.55));
    CHECK(r.rejected_fraction == doctest::Approx(0.25));

    const auto [ov, oth] =
        oracle::exhaustive_threshold(kFixtureLabels, kFixtureProbs, 0.3, 10, macro_f2_score);
    CHECK(r.score == ov);
    CHECK(r.threshold == oth);
}

TEST_CASE("all-correct predictions keep the no-rejection score and min threshold") {
    std::vector<Label> labels{Label::Alive, Label::Dead, Label::Dead};
    std::vector<ProbabilityPair> probs{{0.8, 0.2}, {0.3, 0.7}, {0.1, 0.9}};
    const auto r = find_uncertain_threshold(labels, probs, 0.5, 50);
    CHECK(r.score == doctest::Approx(1.0));
    CHECK(r.threshold == doctest::Approx(0.7));  // min of p_max
}

TEST_CASE("max_u below 1/N returns the no-rejection pair immediately") {
    std::vector<Label> labels{Label::Alive, Label::Alive, Label::Dead, Label::Dead, Label::Dead};
    std::vector<ProbabilityPair> probs{
        {0.9, 0.1}, {0.4, 0.6}, {0.3, 0.7}, {0.2, 0.8}, {0.45, 0.55}};
    std::vector<Label> pred;
    for (const auto& p : probs) pred.push_back(p.argmax());
    const double base = macro_f2_score(labels, pred);

    const auto r = find_uncertain_threshold(labels, probs, 0.1, 100);  // 0.1 < 1/5
    CHECK(r.score == doctest::Approx(base));
    CHECK(r.threshold == doctest::Approx(0.55));
}

TEST_CASE("degenerate grid: all p_max equal returns at once") {
    std::vector<Label> labels{Label::Alive, Label::Dead};
    std::vector<ProbabilityPair> probs{{0.7, 0.3}, {0.3, 0.7}};
    const auto r = find_uncertain_threshold(labels, probs, 0.5, 10);
    CHECK(r.threshold == doctest::Approx(0.7));
    CHECK(r.score == doctest::Approx(1.0));
}

TEST_CASE("input validation") {
    std::vector<Label> labels{Label::Alive};
    std::vector<ProbabilityPair> probs{{0.6, 0.4}};
    CHECK_THROWS_AS(find_uncertain_threshold({}, {}, 0.2, 10), std::invalid_argument);
    CHECK_THROWS_AS(find_uncertain_threshold(labels, probs, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(find_uncertain_threshold(labels, probs, 1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(find_uncertain_threshold(labels, probs, 0.2, 0), std::invalid_argument);
}

TEST_CASE("property: matches the exhaustive oracle on random instances") {
    Rng rng(20240811);
    for (int trial = 0; trial < 300; ++trial) {
        const auto inst = random_instance(rng, 60, 200);
        const auto r =
            find_uncertain_threshold(inst.labels, inst.probs, inst.max_u, inst.n);
        const auto [ov, oth] = oracle::exhaustive_threshold(inst.labels, inst.probs, inst.max_u,
                                                            inst.n, macro_f2_score);
        REQUIRE(r.score == ov);
        REQUIRE(r.threshold == oth);
    }
}

TEST_CASE("property: returned score never drops below the no-rejection score") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = random_instance(rng, 40, 100);
        std::vector<Label> pred;
        for (const auto& p : inst.probs) pred.push_back(p.argmax());
        const double base = macro_f2_score(inst.labels, pred);
        const auto r = find_uncertain_threshold(inst.labels, inst.probs, inst.max_u, inst.n);
        REQUIRE(r.score >= base);
    }
}

TEST_CASE("property: rejected fraction grows with the threshold over the grid") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto inst = random_instance(rng, 50, 60);
        std::vector<double> pmax;
        for (const auto& p : inst.probs) pmax.push_back(p.max());
        const auto [lo, hi] = std::minmax_element(pmax.begin(), pmax.end());
        double prev = -1.0;
        for (int i = 0; i < inst.n; ++i) {
            const double th = *lo + i * (*hi - *lo) / inst.n;
            std::size_t kept = 0;
            for (double p : pmax) kept += p > th;
            const double rejected = 1.0 - static_cast<double>(kept) / pmax.size();
            REQUIRE(rejected >= prev);
            prev = rejected;
        }
    }
}

TEST_CASE("triage maps probabilities to dead/alive/uncertain") {
    CHECK(triage({0.35, 0.65}, 0.7).label == TriageLabel::Uncertain);  // 0.65 <= 0.7
    CHECK(triage({0.1, 0.9}, 0.7).label == TriageLabel::Dead);
    CHECK(triage({0.9, 0.1}, 0.7).label == TriageLabel::Alive);
    // at threshold 0.5 only an exact tie is uncertain
    CHECK(triage({0.5, 0.5}, 0.5).label == TriageLabel::Uncertain);
    CHECK(triage({0.49, 0.51}, 0.5).label == TriageLabel::Dead);
}
