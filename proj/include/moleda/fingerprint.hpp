#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moleda/smiles.hpp"

namespace moleda::fingerprint {

enum class Method { HashedPath, AtmoKeys };

std::string_view method_name(Method m) noexcept;
Method method_from_name(std::string_view name);

/// Sparse bit vector: sorted, duplicate-free set positions in [0, n_bits).
struct Fingerprint {
    std::vector<std::uint32_t> bits;
    std::uint32_t n_bits = 0;
    Method method = Method::HashedPath;
    /// Parameters used to build it, e.g. {"max_len": "7"} or {"version": "atmokeys-v1"}.
    std::map<std::string, std::string> params;

    bool test(std::uint32_t pos) const;
    bool operator==(const Fingerprint&) const = default;
};

struct PathConfig {
    int max_len = 7;
    std::uint32_t n_bits = 2048;

    void validate() const;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Label of one atom inside a path string: element, lowercased if aromatic,
/// followed by a signed charge ("N+1", "o", "O-1").
std::string atom_label(const smiles::Atom& atom);

/// Canonical strings of every simple path with 0..max_len bonds.
std::vector<std::string> enumerate_paths(const smiles::MolecularGraph& graph, int max_len);

Fingerprint path_fingerprint(const smiles::MolecularGraph& graph, const PathConfig& cfg = {});

inline constexpr std::size_t kAtmoKeyCount = 24;
inline constexpr std::string_view kAtmoKeysVersion = "atmokeys-v1";

/// Names of the AtmoKeys in bit order.
const std::array<std::string_view, kAtmoKeyCount>& atmo_key_names();

Fingerprint atmo_keys(const smiles::MolecularGraph& graph);

/// Fingerprint of a whole SMILES string: bits are the union over its components.
Fingerprint fingerprint_smiles(std::string_view smiles, Method method, const PathConfig& cfg = {});

/// |a ∩ b| / |a ∪ b|; 1 when both are empty.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

/// Golden-file line: `SMILES<TAB>p0,p1,...`.
std::string golden_line(std::string_view smiles, const Fingerprint& fp);

struct GoldenEntry {
    std::string smiles;
    std::vector<std::uint32_t> bits;
};
std::vector<GoldenEntry> read_golden(std::istream& in);

}  // namespace moleda::fingerprint
