#include "prognosis/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "prognosis/csv.hpp"

namespace prognosis {

// Howard Hinnant's civil-date algorithm.
int days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

std::string civil_from_days(int z) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y + (m <= 2), m, d);
    return buf;
}

std::optional<int> parse_iso_date(const std::string& s) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3) return std::nullopt;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    return days_from_civil(y, m, d);
}

std::string to_string(RawOutcome o) {
    switch (o) {
        case RawOutcome::Died: return "died";
        case RawOutcome::Released: return "released";
        case RawOutcome::TransferredHospital: return "transferred_hospital";
        case RawOutcome::TransferredRehab: return "transferred_rehab";
    }
    return "?";
}

std::optional<RawOutcome> raw_outcome_from_string(const std::string& s) {
    if (s == "died") return RawOutcome::Died;
    if (s == "released") return RawOutcome::Released;
    if (s == "transferred_hospital") return RawOutcome::TransferredHospital;
    if (s == "transferred_rehab") return RawOutcome::TransferredRehab;
    return std::nullopt;
}

std::string to_string(Label l) { return l == Label::Dead ? "dead" : "alive"; }
std::string to_string(Phase p) { return p == Phase::Hcp ? "hcp" : "mcp"; }

Outcome outcome_from_raw(RawOutcome raw) {
    switch (raw) {
        case RawOutcome::Died: return {raw, Label::Dead};
        case RawOutcome::Released: return {raw, Label::Alive};
        case RawOutcome::TransferredRehab: return {raw, Label::Alive};
        case RawOutcome::TransferredHospital: return {raw, std::nullopt};
    }
    return {raw, std::nullopt};
}

namespace {

const char* kHeader = "patient_id,age,sex,admission_date,outcome,release_day,test,day,value";

struct PendingPatient {
    PatientRecord record;
    // (test index, day) -> value; keeps last value on conflict
    std::map<std::pair<int, int>, double> events;
};

}  // namespace

IngestReport ingest_cohort(const std::string& path, const LabRegistry& registry) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open event file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw IngestError(path + ":1: empty file, expected header");
    {
        auto fields = csv::split_line(line);
        if (csv::join(fields) != kHeader) {
            throw IngestError(path + ":1: bad header, expected '" + kHeader + "'");
        }
    }

    IngestReport report;
    std::vector<std::string> order;  // patient ids by first appearance
    std::unordered_map<std::string, PendingPatient> patients;

    auto reject = [&](int line_no, const std::string& why) {
        report.rejected_rows.push_back(path + ":" + std::to_string(line_no) + ": " + why);
    };
    auto warn = [&](int line_no, const std::string& what) {
        report.warnings.push_back(path + ":" + std::to_string(line_no) + ": " + what);
    };

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = csv::split_line(line);
        if (f.size() != 9) {
            throw IngestError(path + ":" + std::to_string(line_no) + ": expected 9 columns, got " +
                              std::to_string(f.size()));
        }
        const std::string& pid = f[0];
        if (pid.empty()) {
            reject(line_no, "empty patient_id");
            continue;
        }
        auto age = csv::parse_int(f[1]);
        if (!age || *age < 0 || *age > 130) {
            reject(line_no, "bad age '" + f[1] + "'");
            continue;
        }
        if (f[2] != "M" && f[2] != "F") {
            reject(line_no, "sex must be M or F, got '" + f[2] + "'");
            continue;
        }
        const Sex sex = sex_from_string(f[2]);
        auto admission = parse_iso_date(f[3]);
        if (!admission) {
            reject(line_no, "bad admission_date '" + f[3] + "'");
            continue;
        }
        auto raw = raw_outcome_from_string(f[4]);
        if (!raw) {
            reject(line_no, "unknown outcome '" + f[4] + "'");
            continue;
        }
        auto release = csv::parse_int(f[5]);
        if (!release || *release < 1) {
            reject(line_no, "release_day must be an integer >= 1, got '" + f[5] + "'");
            continue;
        }

        auto it = patients.find(pid);
        if (it == patients.end()) {
            PendingPatient p;
            p.record.patient_id = pid;
            p.record.age = static_cast<int>(*age);
            p.record.sex = sex;
            p.record.admission_day = *admission;
            p.record.stay_length = static_cast<int>(*release);
            p.record.outcome = outcome_from_raw(*raw);
            it = patients.emplace(pid, std::move(p)).first;
            order.push_back(pid);
        } else {
            const PatientRecord& r = it->second.record;
            if (r.age != static_cast<int>(*age) || r.sex != sex ||
                r.admission_day != *admission || r.stay_length != static_cast<int>(*release) ||
                r.outcome.raw != *raw) {
                reject(line_no, "patient metadata conflicts with earlier rows for '" + pid + "'");
                continue;
            }
        }

        // A row with the event triple left empty just declares the patient.
        if (f[6].empty() && f[7].empty() && f[8].empty()) continue;

        auto test = lab_test_from_string(f[6]);
        if (!test) {
            reject(line_no, "unknown test id '" + f[6] + "'");
            continue;
        }
        auto day = csv::parse_int(f[7]);
        if (!day || *day < 0) {
            reject(line_no, "event day must be an integer >= 0, got '" + f[7] + "'");
            continue;
        }
        if (*day > it->second.record.stay_length) {
            reject(line_no, "event day " + f[7] + " is past the release day " + f[5]);
            continue;
        }
        auto value = csv::parse_double(f[8]);
        if (!value || std::isnan(*value) || !std::isfinite(*value)) {
            reject(line_no, "bad value '" + f[8] + "'");
            continue;
        }
        if (*value < 0) {
            reject(line_no, "negative value for " + f[6]);
            continue;
        }
        const LabTestSpec& spec = registry.spec(*test);
        if ((spec.domain_min && *value < *spec.domain_min) ||
            (spec.domain_max && *value > *spec.domain_max)) {
            reject(line_no, to_string(*test) + " value " + f[8] + " outside valid domain");
            continue;
        }

        const auto key = std::make_pair(registry.index_of(*test), static_cast<int>(*day));
        auto [ev, inserted] = it->second.events.emplace(key, *value);
        if (!inserted) {
            if (ev->second == *value) {
                warn(line_no, "duplicate row for (" + pid + ", " + f[6] + ", day " + f[7] +
                                  ") dropped");
            } else {
                warn(line_no, "conflicting value for (" + pid + ", " + f[6] + ", day " + f[7] +
                                  "): keeping " + f[8]);
                ev->second = *value;
            }
        }
    }

    for (const auto& pid : order) {
        PendingPatient& p = patients.at(pid);
        p.record.events.reserve(p.events.size());
        for (const auto& [key, value] : p.events) {
            LabEvent e;
            e.test = registry.tests()[static_cast<std::size_t>(key.first)].id;
            e.day = key.second;
            e.value = value;
            p.record.events.push_back(e);
        }
        // events sorted by (day, test)
        std::sort(p.record.events.begin(), p.record.events.end(),
                  [&](const LabEvent& a, const LabEvent& b) {
                      if (a.day != b.day) return a.day < b.day;
                      return registry.index_of(a.test) < registry.index_of(b.test);
                  });
        report.records.push_back(std::move(p.record));
    }
    return report;
}

void write_cohort(const std::string& path, const Cohort& records) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write cohort file: " + path);
    out << kHeader << '\n';
    for (const auto& r : records) {
        const std::string prefix = r.patient_id + "," + std::to_string(r.age) + "," +
                                   to_string(r.sex) + "," + civil_from_days(r.admission_day) +
                                   "," + to_string(r.outcome.raw) + "," +
                                   std::to_string(r.stay_length) + ",";
        if (r.events.empty()) {
            out << prefix << ",,\n";
            continue;
        }
        for (const auto& e : r.events) {
            out << prefix << to_string(e.test) << ',' << e.day << ','
                << csv::format_double(e.value) << '\n';
        }
    }
}

Phase assign_phase(const PatientRecord& record, int boundary_day) {
    return record.admission_day < boundary_day ? Phase::Hcp : Phase::Mcp;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

PhaseStats stats_for(const std::vector<const PatientRecord*>& records) {
    PhaseStats s;
    std::vector<double> stays;
    std::map<LabTest, std::vector<double>> values;
    for (const auto* r : records) {
        if (r->outcome.excluded()) continue;
        ++s.n_patients;
        if (r->outcome.label == Label::Dead) ++s.n_dead;
        stays.push_back(static_cast<double>(r->stay_length));
        for (const auto& e : r->events) values[e.test].push_back(e.value);
    }
    if (s.n_patients > 0) {
        s.mortality_rate = static_cast<double>(s.n_dead) / s.n_patients;
        s.median_stay = median(stays);
    }
    for (auto& [test, vs] : values) s.median_values[test] = median(std::move(vs));
    return s;
}

}  // namespace

CohortStats cohort_stats(const Cohort& records, int boundary_day) {
    if (records.empty()) throw std::invalid_argument("cohort_stats: empty cohort");
    CohortStats out;
    out.n_total = static_cast<int>(records.size());
    std::vector<const PatientRecord*> all, hcp, mcp;
    for (const auto& r : records) {
        if (r.outcome.excluded()) ++out.n_excluded;
        all.push_back(&r);
        (assign_phase(r, boundary_day) == Phase::Hcp ? hcp : mcp).push_back(&r);
    }
    out.overall = stats_for(all);
    out.hcp = stats_for(hcp);
    out.mcp = stats_for(mcp);
    return out;
}

}  // namespace prognosis
