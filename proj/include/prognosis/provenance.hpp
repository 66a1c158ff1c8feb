#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace prognosis {

// Stamped into every JSON artifact so a run's outputs can be tied back to
// the exact configuration and seed that produced them.
struct Provenance {
    std::string tool_version;
    std::string config_hash;
    std::uint64_t master_seed = 0;
};

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the canonical (sorted-key) JSON dump; integrity marker, not a
// cryptographic digest.
std::string config_hash(const nlohmann::json& config);

nlohmann::json provenance_to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);

Provenance make_provenance(const nlohmann::json& config, std::uint64_t master_seed);

}  // namespace prognosis
