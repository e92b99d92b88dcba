#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

namespace moleda::testing {

/// n JSONL documents with a uniform "mass", a normal "logp" that is sometimes
/// absent or textual, a categorical "series" and a boolean "active".
inline std::string random_jsonl(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mass(50.0, 650.0);
    std::normal_distribution<double> logp(2.0, 1.5);
    std::uniform_int_distribution<int> pick(0, 9);
    const char* series[] = {"alpha", "beta", "gamma"};
    std::ostringstream out;
    for (int i = 0; i < n; ++i) {
        nlohmann::ordered_json j;
        j["id"] = "m" + std::to_string(i);
        j["smiles"] = std::string(1 + i % 7, 'C');
        j["mass"] = mass(rng);
        const int r = pick(rng);
        if (r == 0) {
            j["logp"] = "n/a";
        } else if (r > 1) {
            j["logp"] = logp(rng);
        }
        j["series"] = series[pick(rng) % 3];
        j["active"] = pick(rng) < 3;
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace moleda::testing
