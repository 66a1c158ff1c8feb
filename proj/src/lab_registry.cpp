#include "prognosis/lab_registry.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace prognosis {

using nlohmann::json;

Sex sex_from_string(const std::string& s) {
    if (s == "M") return Sex::Male;
    if (s == "F") return Sex::Female;
    throw std::invalid_argument("sex must be M or F, got '" + s + "'");
}

std::string to_string(Sex s) { return s == Sex::Male ? "M" : "F"; }

std::array<LabTest, kLabTestCount> all_lab_tests() {
    return {LabTest::Pcr,        LabTest::Ldh,        LabTest::Ferritin,
            LabTest::TroponinT,  LabTest::Wbc,        LabTest::DDimer,
            LabTest::Fibrinogen, LabTest::Lymphocyte, LabTest::NeutrophilLymphocyteRatio,
            LabTest::XRayScore};
}

std::string to_string(LabTest t) {
    switch (t) {
        case LabTest::Pcr: return "PCR";
        case LabTest::Ldh: return "LDH";
        case LabTest::Ferritin: return "Ferritin";
        case LabTest::TroponinT: return "TroponinT";
        case LabTest::Wbc: return "WBC";
        case LabTest::DDimer: return "DDimer";
        case LabTest::Fibrinogen: return "Fibrinogen";
        case LabTest::Lymphocyte: return "Lymphocyte";
        case LabTest::NeutrophilLymphocyteRatio: return "NLR";
        case LabTest::XRayScore: return "XRayScore";
    }
    return "?";
}

std::optional<LabTest> lab_test_from_string(const std::string& s) {
    for (LabTest t : all_lab_tests()) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

LabRegistry::LabRegistry(std::vector<LabTestSpec> tests) : tests_(std::move(tests)) { validate(); }

void LabRegistry::validate() const {
    if (tests_.size() != kLabTestCount) {
        throw RegistryError("registry must define exactly the ten known lab tests");
    }
    for (LabTest t : all_lab_tests()) {
        if (std::none_of(tests_.begin(), tests_.end(),
                         [&](const LabTestSpec& s) { return s.id == t; })) {
            throw RegistryError("registry is missing test " + to_string(t));
        }
    }
    for (const auto& s : tests_) {
        auto check_range = [&](const NormalRange& r) {
            if (r.lower && r.upper && *r.lower > *r.upper) {
                throw RegistryError("normal range lower bound exceeds upper bound for " +
                                    to_string(s.id));
            }
        };
        check_range(s.range);
        if (s.range_female) check_range(*s.range_female);
        if (s.bin_multipliers.empty() ||
            !std::is_sorted(s.bin_multipliers.begin(), s.bin_multipliers.end()) ||
            s.bin_multipliers.front() <= 1.0) {
            throw RegistryError("bin multipliers must be ascending and > 1 for " + to_string(s.id));
        }
        if (!s.range.upper) {
            throw RegistryError("categorisation needs a normal upper bound for " + to_string(s.id));
        }
    }
}

const LabTestSpec& LabRegistry::spec(LabTest t) const {
    for (const auto& s : tests_) {
        if (s.id == t) return s;
    }
    throw RegistryError("unknown test");
}

const NormalRange& LabRegistry::range_for(LabTest t, Sex sex) const {
    const auto& s = spec(t);
    if (sex == Sex::Female && s.range_female) return *s.range_female;
    return s.range;
}

int LabRegistry::index_of(LabTest t) const {
    for (std::size_t i = 0; i < tests_.size(); ++i) {
        if (tests_[i].id == t) return static_cast<int>(i);
    }
    throw RegistryError("unknown test");
}

LabRegistry LabRegistry::defaults() {
    std::vector<LabTestSpec> t;
    auto add = [&](LabTest id, std::string unit, NormalRange r,
                   std::optional<NormalRange> rf = std::nullopt) {
        LabTestSpec s;
        s.id = id;
        s.unit = std::move(unit);
        s.range = r;
        s.range_female = rf;
        t.push_back(std::move(s));
    };
    add(LabTest::Pcr, "mg/L", {std::nullopt, 10.0});
    add(LabTest::Ldh, "U/L", {80.0, 300.0});
    add(LabTest::Ferritin, "ng/mL", {30.0, 400.0}, NormalRange{13.0, 150.0});
    add(LabTest::TroponinT, "ng/L", {std::nullopt, 14.0});
    add(LabTest::Wbc, "10^9/L", {4.0, 11.0});
    add(LabTest::DDimer, "ng/mL", {std::nullopt, 250.0});
    add(LabTest::Fibrinogen, "mg/dL", {180.0, 430.0});
    add(LabTest::Lymphocyte, "%", {20.0, 45.0});
    add(LabTest::NeutrophilLymphocyteRatio, "ratio", {0.8, 3.5});
    LabTestSpec xray;
    xray.id = LabTest::XRayScore;
    xray.unit = "score";
    xray.range = NormalRange{std::nullopt, 7.0, /*upper_inclusive=*/false};
    xray.domain_min = 0.0;
    xray.domain_max = 18.0;
    t.push_back(std::move(xray));
    return LabRegistry(std::move(t));
}

namespace {

json range_to_json(const NormalRange& r) {
    json j = json::object();
    if (r.lower) j["lower"] = *r.lower;
    if (r.upper) j["upper"] = *r.upper;
    if (!r.upper_inclusive) j["upper_inclusive"] = false;
    return j;
}

NormalRange range_from_json(const json& j) {
    NormalRange r;
    if (j.contains("lower")) r.lower = j.at("lower").get<double>();
    if (j.contains("upper")) r.upper = j.at("upper").get<double>();
    if (j.contains("upper_inclusive")) r.upper_inclusive = j.at("upper_inclusive").get<bool>();
    return r;
}

}  // namespace

LabRegistry LabRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RegistryError("cannot open registry file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw RegistryError("registry file " + path + " is not valid JSON: " + e.what());
    }
    std::vector<LabTestSpec> tests;
    for (const auto& jt : j.at("tests")) {
        LabTestSpec s;
        const std::string id = jt.at("id").get<std::string>();
        auto t = lab_test_from_string(id);
        if (!t) throw RegistryError("registry defines unknown test id '" + id + "'");
        s.id = *t;
        s.unit = jt.value("unit", std::string{});
        s.range = range_from_json(jt.at("normal"));
        if (jt.contains("normal_female")) s.range_female = range_from_json(jt.at("normal_female"));
        if (jt.contains("bin_multipliers")) {
            s.bin_multipliers = jt.at("bin_multipliers").get<std::vector<double>>();
        }
        if (jt.contains("domain")) {
            s.domain_min = jt.at("domain").at("min").get<double>();
            s.domain_max = jt.at("domain").at("max").get<double>();
        }
        tests.push_back(std::move(s));
    }
    return LabRegistry(std::move(tests));
}

void LabRegistry::save(const std::string& path) const {
    json tests = json::array();
    for (const auto& s : tests_) {
        json jt;
        jt["id"] = to_string(s.id);
        jt["unit"] = s.unit;
        jt["normal"] = range_to_json(s.range);
        if (s.range_female) jt["normal_female"] = range_to_json(*s.range_female);
        jt["bin_multipliers"] = s.bin_multipliers;
        if (s.domain_min && s.domain_max) {
            jt["domain"] = {{"min", *s.domain_min}, {"max", *s.domain_max}};
        }
        tests.push_back(std::move(jt));
    }
    json j;
    j["tests"] = std::move(tests);
    std::ofstream out(path);
    if (!out) throw RegistryError("cannot write registry file: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace prognosis
