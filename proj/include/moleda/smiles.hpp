#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moleda/error.hpp"

namespace moleda::smiles {

enum class Element : std::uint8_t { H, B, C, N, O, F, Si, P, S, Cl, Br, I };

std::string_view symbol(Element e) noexcept;

/// Default valence used for implicit hydrogen counting.
int default_valence(Element e) noexcept;

enum class BondOrder : std::uint8_t { Single, Double, Triple, Aromatic };

/// '-', '=', '#' or ':'.
char bond_symbol(BondOrder order) noexcept;

struct Atom {
    Element element = Element::C;
    bool aromatic = false;
    int formal_charge = 0;
    /// Set only for bracket atoms.
    std::optional<int> explicit_h;
    std::size_t index = 0;
};

struct Bond {
    std::size_t a = 0;
    std::size_t b = 0;
    BondOrder order = BondOrder::Single;
};

struct Neighbor {
    std::size_t atom;
    std::size_t bond;
};

/// One connected component of a SMILES string.
class MolecularGraph {
public:
    MolecularGraph() = default;

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::vector<Bond>& bonds() const noexcept { return bonds_; }
    const std::vector<Neighbor>& neighbors(std::size_t atom) const { return adjacency_.at(atom); }
    std::size_t degree(std::size_t atom) const { return adjacency_.at(atom).size(); }
    const std::string& source() const noexcept { return source_; }

    /// True when some atom carries more bond order than its default valence.
    bool valence_warning() const noexcept { return valence_warning_; }

    /// Index of the bond joining a and b, if any.
    std::optional<std::size_t> bond_between(std::size_t a, std::size_t b) const;

private:
    friend class GraphBuilder;

    std::vector<Atom> atoms_;
    std::vector<Bond> bonds_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::string source_;
    bool valence_warning_ = false;
};

enum class ParseErrorKind { EmptyInput, UnclosedRing, UnbalancedParen, UnknownElement, Syntax };

class ParseError : public InvalidArgument {
public:
    ParseError(ParseErrorKind kind, std::size_t offset, const std::string& message);

    ParseErrorKind kind() const noexcept { return kind_; }
    /// Byte offset into the input where the problem was detected.
    std::size_t offset() const noexcept { return offset_; }

private:
    ParseErrorKind kind_;
    std::size_t offset_;
};

/// Parses a SMILES string into one graph per dot-separated component.
/// Stereo marks and isotopes are accepted and dropped.
std::vector<MolecularGraph> parse(std::string_view text);

/// Implicit hydrogen count of `atom` (explicit count for bracket atoms).
int implicit_hydrogens(const MolecularGraph& graph, std::size_t atom);

/// Total hydrogens attached to every atom of the graph.
int total_hydrogens(const MolecularGraph& graph);

}  // namespace moleda::smiles
