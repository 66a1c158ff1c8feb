#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace prognosis {

enum class Sex { Male, Female };

Sex sex_from_string(const std::string& s);
std::string to_string(Sex s);

// The ten lab findings tracked per patient. The order here fixes the feature
// order everywhere downstream.
enum class LabTest {
    Pcr,
    Ldh,
    Ferritin,
    TroponinT,
    Wbc,
    DDimer,
    Fibrinogen,
    Lymphocyte,
    NeutrophilLymphocyteRatio,
    XRayScore,
};

inline constexpr int kLabTestCount = 10;

std::array<LabTest, kLabTestCount> all_lab_tests();
std::string to_string(LabTest t);
std::optional<LabTest> lab_test_from_string(const std::string& s);

// Normal range; bounds are optional (one-sided ranges) and the upper bound
// may be exclusive (chest X-ray score: normal is < 7).
struct NormalRange {
    std::optional<double> lower;
    std::optional<double> upper;
    bool upper_inclusive = true;

    bool contains(double v) const {
        if (lower && v < *lower) return false;
        if (upper) {
            if (upper_inclusive ? v > *upper : v >= *upper) return false;
        }
        return true;
    }
};

struct LabTestSpec {
    LabTest id;
    std::string unit;
    NormalRange range;                        // male / sex-independent
    std::optional<NormalRange> range_female;  // ferritin only in the defaults
    std::vector<double> bin_multipliers{2.0, 4.0, 6.0, 10.0};
    std::optional<double> domain_min;  // hard validity bounds (X-ray 0..18)
    std::optional<double> domain_max;
};

class LabRegistry {
public:
    // Table-of-record defaults: normal ranges as used in the clinic.
    static LabRegistry defaults();

    static LabRegistry load(const std::string& path);
    void save(const std::string& path) const;

    const std::vector<LabTestSpec>& tests() const { return tests_; }
    const LabTestSpec& spec(LabTest t) const;
    const NormalRange& range_for(LabTest t, Sex sex) const;
    int index_of(LabTest t) const;

    explicit LabRegistry(std::vector<LabTestSpec> tests);

private:
    void validate() const;
    std::vector<LabTestSpec> tests_;
};

struct RegistryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace prognosis
