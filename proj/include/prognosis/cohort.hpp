#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prognosis/lab_registry.hpp"

namespace prognosis {

// --- calendar helpers -------------------------------------------------------
// Dates are normalized to days since 1970-01-01 at ingestion; everything
// downstream works on integer offsets.

int days_from_civil(int year, int month, int day);
std::string civil_from_days(int days);              // ISO-8601 yyyy-mm-dd
std::optional<int> parse_iso_date(const std::string& s);

// --- domain types ------------------------------------------------------------

enum class RawOutcome { Died, Released, TransferredHospital, TransferredRehab };
enum class Label { Dead, Alive };
enum class Phase { Hcp, Mcp };

std::string to_string(RawOutcome o);
std::optional<RawOutcome> raw_outcome_from_string(const std::string& s);
std::string to_string(Label l);
std::string to_string(Phase p);

struct Outcome {
    RawOutcome raw = RawOutcome::Released;
    std::optional<Label> label;  // nullopt = excluded from training/testing

    bool excluded() const { return !label.has_value(); }
};

// Transfers to another hospital leave the outcome unknown, so those patients
// are excluded; rehabilitation transfers count as released alive.
Outcome outcome_from_raw(RawOutcome raw);

struct LabEvent {
    LabTest test = LabTest::Pcr;
    double value = 0.0;
    int day = 0;  // offset from admission, day 0 = admission date
};

struct PatientRecord {
    std::string patient_id;
    int age = 0;
    Sex sex = Sex::Male;
    int admission_day = 0;  // days since epoch
    int stay_length = 1;    // >= 1; events satisfy day <= stay_length
    std::vector<LabEvent> events;
    Outcome outcome;
};

using Cohort = std::vector<PatientRecord>;

// --- ingestion ----------------------------------------------------------------

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IngestReport {
    Cohort records;
    std::vector<std::string> warnings;        // deduplication, conflicting values
    std::vector<std::string> rejected_rows;   // row-level invariant violations
};

// Parses the event CSV (header: patient_id,age,sex,admission_date,outcome,
// release_day,test,day,value). Structural problems (missing header, wrong
// column count, unreadable file) throw IngestError with the line number;
// rows breaking domain invariants are rejected and reported.
IngestReport ingest_cohort(const std::string& path, const LabRegistry& registry);

// Writes records back in the same event-file schema; re-ingesting the output
// reproduces the identical record collection.
void write_cohort(const std::string& path, const Cohort& records);

// --- phase partition & stats ---------------------------------------------------

// Admissions strictly before the boundary are HCP; the boundary day itself
// starts the moderate phase.
Phase assign_phase(const PatientRecord& record, int boundary_day);

struct PhaseStats {
    int n_patients = 0;   // non-excluded
    int n_dead = 0;
    double mortality_rate = 0.0;
    double median_stay = 0.0;
    std::map<LabTest, double> median_values;
};

struct CohortStats {
    int n_total = 0;
    int n_excluded = 0;
    PhaseStats overall;
    PhaseStats hcp;
    PhaseStats mcp;
};

CohortStats cohort_stats(const Cohort& records, int boundary_day);

double median(std::vector<double> values);  // empty -> throws

}  // namespace prognosis
