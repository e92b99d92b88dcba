#include "moleda/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <istream>
#include <set>
#include <sstream>

namespace moleda::fingerprint {

using smiles::Atom;
using smiles::BondOrder;
using smiles::Element;
using smiles::MolecularGraph;

std::string_view method_name(Method m) noexcept {
    return m == Method::HashedPath ? "hashed_path" : "atmo_keys";
}

Method method_from_name(std::string_view name) {
    if (name == "hashed_path") return Method::HashedPath;
    if (name == "atmo_keys") return Method::AtmoKeys;
    throw InvalidArgument("unknown_fingerprint_method", "unknown fingerprint method '" + std::string(name) + "'");
}

bool Fingerprint::test(std::uint32_t pos) const { return std::binary_search(bits.begin(), bits.end(), pos); }

void PathConfig::validate() const {
    if (max_len < 1) throw InvalidArgument("invalid_path_config", "max_len must be at least 1");
    if (n_bits < 64 || !std::has_single_bit(n_bits)) {
        throw InvalidArgument("invalid_path_config", "n_bits must be a power of two >= 64");
    }
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string atom_label(const Atom& atom) {
    std::string label(smiles::symbol(atom.element));
    if (atom.aromatic) {
        for (auto& ch : label) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    if (atom.formal_charge != 0) {
        label += atom.formal_charge > 0 ? '+' : '-';
        label += std::to_string(std::abs(atom.formal_charge));
    }
    return label;
}

namespace {

class PathWalker {
public:
    PathWalker(const MolecularGraph& g, int max_len) : g_(g), max_len_(max_len), on_path_(g.atoms().size(), false) {
        labels_.reserve(g.atoms().size());
        for (const auto& a : g.atoms()) labels_.push_back(atom_label(a));
    }

    std::set<std::string> run() {
        for (std::size_t start = 0; start < g_.atoms().size(); ++start) {
            atoms_.assign(1, start);
            bonds_.clear();
            on_path_[start] = true;
            emit();
            extend();
            on_path_[start] = false;
        }
        return std::move(found_);
    }

private:
    void extend() {
        if (static_cast<int>(bonds_.size()) == max_len_) return;
        const std::size_t tail = atoms_.back();
        for (const auto& nb : g_.neighbors(tail)) {
            if (on_path_[nb.atom]) continue;
            on_path_[nb.atom] = true;
            atoms_.push_back(nb.atom);
            bonds_.push_back(g_.bonds()[nb.bond].order);
            emit();
            extend();
            bonds_.pop_back();
            atoms_.pop_back();
            on_path_[nb.atom] = false;
        }
    }

    void emit() {
        std::string fwd = labels_[atoms_.front()];
        for (std::size_t i = 0; i < bonds_.size(); ++i) {
            fwd += smiles::bond_symbol(bonds_[i]);
            fwd += labels_[atoms_[i + 1]];
        }
        std::string rev = labels_[atoms_.back()];
        for (std::size_t i = bonds_.size(); i-- > 0;) {
            rev += smiles::bond_symbol(bonds_[i]);
            rev += labels_[atoms_[i]];
        }
        found_.insert(std::min(fwd, rev));
    }

    const MolecularGraph& g_;
    int max_len_;
    std::vector<bool> on_path_;
    std::vector<std::string> labels_;
    std::vector<std::size_t> atoms_;
    std::vector<BondOrder> bonds_;
    std::set<std::string> found_;
};

void normalize(std::vector<std::uint32_t>& bits) {
    std::sort(bits.begin(), bits.end());
    bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
}

int hydrogens(const MolecularGraph& g, std::size_t atom) { return smiles::implicit_hydrogens(g, atom); }

bool is(const MolecularGraph& g, std::size_t atom, Element e) { return g.atoms()[atom].element == e; }

/// True when the bond lies on a cycle, i.e. its endpoints stay connected without it.
bool bond_in_ring(const MolecularGraph& g, std::size_t bond) {
    const auto& b = g.bonds()[bond];
    std::vector<bool> seen(g.atoms().size(), false);
    std::vector<std::size_t> stack{b.a};
    seen[b.a] = true;
    while (!stack.empty()) {
        const std::size_t at = stack.back();
        stack.pop_back();
        for (const auto& nb : g.neighbors(at)) {
            if (nb.bond == bond || seen[nb.atom]) continue;
            if (nb.atom == b.b) return true;
            seen[nb.atom] = true;
            stack.push_back(nb.atom);
        }
    }
    return false;
}

}  // namespace

std::vector<std::string> enumerate_paths(const MolecularGraph& graph, int max_len) {
    auto found = PathWalker(graph, max_len).run();
    return {found.begin(), found.end()};
}

Fingerprint path_fingerprint(const MolecularGraph& graph, const PathConfig& cfg) {
    cfg.validate();
    if (graph.atoms().empty()) throw InvalidArgument("empty_graph", "cannot fingerprint an empty graph");
    Fingerprint fp;
    fp.n_bits = cfg.n_bits;
    fp.method = Method::HashedPath;
    fp.params = {{"max_len", std::to_string(cfg.max_len)}, {"n_bits", std::to_string(cfg.n_bits)}};
    const std::uint64_t mask = cfg.n_bits - 1;
    for (const auto& path : enumerate_paths(graph, cfg.max_len)) {
        fp.bits.push_back(static_cast<std::uint32_t>(fnv1a64(path) & mask));
    }
    normalize(fp.bits);
    return fp;
}

const std::array<std::string_view, kAtmoKeyCount>& atmo_key_names() {
    static constexpr std::array<std::string_view, kAtmoKeyCount> names = {
        "has_carbon",    "has_nitrogen", "has_oxygen",     "has_sulfur",       "has_halogen",
        "oxygen_ge_3",   "oxygen_ge_6",  "carbon_ge_5",    "carbon_ge_10",     "hydroxyl",
        "carbonyl",      "carboxyl",     "ether",          "peroxide",         "hydroperoxide",
        "nitro_nitrate", "amine",        "nitrile",        "aromatic_ring",    "nonaromatic_ring",
        "cc_double",     "triple_bond",  "charged",        "ester",
    };
    return names;
}

Fingerprint atmo_keys(const MolecularGraph& g) {
    if (g.atoms().empty()) throw InvalidArgument("empty_graph", "cannot fingerprint an empty graph");
    std::array<bool, kAtmoKeyCount> key{};
    const auto& atoms = g.atoms();
    const auto& bonds = g.bonds();

    int n_c = 0, n_o = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const Element e = atoms[i].element;
        n_c += e == Element::C;
        n_o += e == Element::O;
        key[1] = key[1] || e == Element::N;
        key[3] = key[3] || e == Element::S;
        key[4] = key[4] || e == Element::F || e == Element::Cl || e == Element::Br || e == Element::I;
        key[22] = key[22] || atoms[i].formal_charge != 0;
    }
    key[0] = n_c > 0;
    key[2] = n_o > 0;
    key[5] = n_o >= 3;
    key[6] = n_o >= 6;
    key[7] = n_c >= 5;
    key[8] = n_c >= 10;

    const auto oh = [&](std::size_t atom) { return is(g, atom, Element::O) && hydrogens(g, atom) >= 1; };

    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (oh(i)) key[9] = true;

        if (is(g, i, Element::O) && !atoms[i].aromatic) {
            const auto& nbs = g.neighbors(i);
            if (nbs.size() == 2 && std::all_of(nbs.begin(), nbs.end(), [&](const auto& nb) {
                    return is(g, nb.atom, Element::C) && bonds[nb.bond].order == BondOrder::Single;
                })) {
                key[12] = true;
            }
        }

        if (is(g, i, Element::N)) {
            int o_neighbors = 0;
            for (const auto& nb : g.neighbors(i)) o_neighbors += is(g, nb.atom, Element::O);
            if (o_neighbors >= 2) key[15] = true;
            if (hydrogens(g, i) >= 1) key[16] = true;
        }

        if (is(g, i, Element::C)) {
            bool carbonyl_o = false, hydroxyl_o = false, ester_o = false;
            for (const auto& nb : g.neighbors(i)) {
                if (!is(g, nb.atom, Element::O)) continue;
                const BondOrder order = bonds[nb.bond].order;
                if (order == BondOrder::Double) carbonyl_o = true;
                if (order != BondOrder::Single) continue;
                if (oh(nb.atom)) hydroxyl_o = true;
                for (const auto& nb2 : g.neighbors(nb.atom)) {
                    if (nb2.atom != i && is(g, nb2.atom, Element::C) && bonds[nb2.bond].order == BondOrder::Single) {
                        ester_o = true;
                    }
                }
            }
            if (carbonyl_o && hydroxyl_o) key[11] = true;
            if (carbonyl_o && ester_o) key[23] = true;
        }
    }

    for (std::size_t b = 0; b < bonds.size(); ++b) {
        const auto& bond = bonds[b];
        const bool c_a = is(g, bond.a, Element::C), c_b = is(g, bond.b, Element::C);
        const bool o_a = is(g, bond.a, Element::O), o_b = is(g, bond.b, Element::O);
        const bool n_a = is(g, bond.a, Element::N), n_b = is(g, bond.b, Element::N);
        switch (bond.order) {
            case BondOrder::Double:
                if ((c_a && o_b) || (o_a && c_b)) key[10] = true;
                if (c_a && c_b) key[20] = true;
                break;
            case BondOrder::Triple:
                key[21] = true;
                if ((c_a && n_b) || (n_a && c_b)) key[17] = true;
                break;
            case BondOrder::Single:
                if (o_a && o_b) {
                    key[13] = true;
                    if (hydrogens(g, bond.a) >= 1 || hydrogens(g, bond.b) >= 1) key[14] = true;
                }
                break;
            case BondOrder::Aromatic:
                key[18] = true;
                break;
        }
        if (bond.order != BondOrder::Aromatic && !key[19] && bond_in_ring(g, b)) key[19] = true;
    }

    Fingerprint fp;
    fp.n_bits = kAtmoKeyCount;
    fp.method = Method::AtmoKeys;
    fp.params = {{"version", std::string(kAtmoKeysVersion)}};
    for (std::uint32_t k = 0; k < kAtmoKeyCount; ++k) {
        if (key[k]) fp.bits.push_back(k);
    }
    return fp;
}

Fingerprint fingerprint_smiles(std::string_view text, Method method, const PathConfig& cfg) {
    Fingerprint merged;
    bool first = true;
    for (const auto& graph : smiles::parse(text)) {
        Fingerprint part = method == Method::HashedPath ? path_fingerprint(graph, cfg) : atmo_keys(graph);
        if (first) {
            merged = std::move(part);
            first = false;
            continue;
        }
        merged.bits.insert(merged.bits.end(), part.bits.begin(), part.bits.end());
        normalize(merged.bits);
    }
    return merged;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
    if (a.n_bits != b.n_bits) {
        throw InvalidArgument("length_mismatch", "fingerprints have different lengths (" + std::to_string(a.n_bits) +
                                                     " vs " + std::to_string(b.n_bits) + ")");
    }
    if (a.bits.empty() && b.bits.empty()) return 1.0;
    std::size_t common = 0;
    auto i = a.bits.begin();
    auto j = b.bits.begin();
    while (i != a.bits.end() && j != b.bits.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++common;
            ++i;
            ++j;
        }
    }
    const std::size_t unite = a.bits.size() + b.bits.size() - common;
    return static_cast<double>(common) / static_cast<double>(unite);
}

std::string golden_line(std::string_view smiles, const Fingerprint& fp) {
    std::string line(smiles);
    line += '\t';
    for (std::size_t i = 0; i < fp.bits.size(); ++i) {
        if (i) line += ',';
        line += std::to_string(fp.bits[i]);
    }
    return line;
}

std::vector<GoldenEntry> read_golden(std::istream& in) {
    std::vector<GoldenEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw InvalidArgument("golden_format", "missing TAB in golden line: " + line);
        GoldenEntry e{line.substr(0, tab), {}};
        std::stringstream ss(line.substr(tab + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) e.bits.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace moleda::fingerprint
