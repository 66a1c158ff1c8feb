#include "prognosis/provenance.hpp"

#include <cstdio>

namespace prognosis {

std::string config_hash(const nlohmann::json& config) {
    const std::string canon = config.dump();
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json provenance_to_json(const Provenance& p) {
    nlohmann::json j;
    j["tool_version"] = p.tool_version;
    j["config_hash"] = p.config_hash;
    j["master_seed"] = p.master_seed;
    return j;
}

Provenance provenance_from_json(const nlohmann::json& j) {
    Provenance p;
    p.tool_version = j.at("tool_version").get<std::string>();
    p.config_hash = j.at("config_hash").get<std::string>();
    p.master_seed = j.at("master_seed").get<std::uint64_t>();
    return p;
}

Provenance make_provenance(const nlohmann::json& config, std::uint64_t master_seed) {
    Provenance p;
    p.tool_version = kToolVersion;
    p.config_hash = config_hash(config);
    p.master_seed = master_seed;
    return p;
}

}  // namespace prognosis
