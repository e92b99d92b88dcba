#include <gtest/gtest.h>

#include <cctype>
#include <map>
#include <set>

#include "moleda/smiles.hpp"
#include "oracles/tsv.hpp"

using namespace moleda::smiles;
using moleda::testing::data_path;
using moleda::testing::read_tsv;

namespace {

int aromatic_atoms(const MolecularGraph& g) {
    int n = 0;
    for (const auto& a : g.atoms()) n += a.aromatic;
    return n;
}

std::string kind_code(ParseErrorKind k) {
    switch (k) {
        case ParseErrorKind::EmptyInput: return "empty_input";
        case ParseErrorKind::UnclosedRing: return "unclosed_ring";
        case ParseErrorKind::UnbalancedParen: return "unbalanced_paren";
        case ParseErrorKind::UnknownElement: return "unknown_element";
        case ParseErrorKind::Syntax: return "smiles_syntax";
    }
    return "?";
}

/// Pairs ring-closure digits on the raw token stream of a bracket-free SMILES
/// by position; returns the atom ordinal pairs they connect.
std::set<std::pair<int, int>> ring_pairs_by_scanning(const std::string& s) {
    std::set<std::pair<int, int>> pairs;
    std::map<char, int> open;
    int atom = -1;
    for (char c : s) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            ++atom;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            auto it = open.find(c);
            if (it == open.end()) {
                open[c] = atom;
            } else {
                pairs.insert(std::minmax(it->second, atom));
                open.erase(it);
            }
        }
    }
    return pairs;
}

}  // namespace

TEST(Smiles, SingleCarbon) {
    const auto g = parse("C");
    ASSERT_EQ(g.size(), 1u);
    ASSERT_EQ(g[0].atoms().size(), 1u);
    EXPECT_EQ(g[0].bonds().size(), 0u);
    EXPECT_EQ(g[0].atoms()[0].element, Element::C);
    EXPECT_FALSE(g[0].atoms()[0].aromatic);
    EXPECT_EQ(implicit_hydrogens(g[0], 0), 4);
}

TEST(Smiles, Ethanol) {
    const auto g = parse("CCO").at(0);
    ASSERT_EQ(g.atoms().size(), 3u);
    ASSERT_EQ(g.bonds().size(), 2u);
    EXPECT_EQ(g.atoms()[2].element, Element::O);
    for (const auto& b : g.bonds()) EXPECT_EQ(b.order, BondOrder::Single);
    EXPECT_EQ(implicit_hydrogens(g, 2), 1);
    EXPECT_EQ(g.source(), "CCO");
}

TEST(Smiles, BenzeneRingMatchesTokenScan) {
    const std::string s = "c1ccccc1";
    const auto g = parse(s).at(0);
    ASSERT_EQ(g.atoms().size(), 6u);
    ASSERT_EQ(g.bonds().size(), 6u);
    for (const auto& a : g.atoms()) EXPECT_TRUE(a.aromatic);
    for (const auto& b : g.bonds()) EXPECT_EQ(b.order, BondOrder::Aromatic);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(g.degree(i), 2u);
        EXPECT_EQ(implicit_hydrogens(g, i), 1);
    }
    for (const auto& [a, b] : ring_pairs_by_scanning(s)) {
        EXPECT_TRUE(g.bond_between(static_cast<std::size_t>(a), static_cast<std::size_t>(b)).has_value());
    }
}

TEST(Smiles, RingClosuresMatchTokenScanOnFusedRings) {
    for (const std::string s : {"c1ccc2ccccc2c1", "C1CC2CCC1C2", "c1ccc2cc3ccccc3cc2c1", "C1CC1C2CC2"}) {
        const auto g = parse(s).at(0);
        const auto pairs = ring_pairs_by_scanning(s);
        for (const auto& [a, b] : pairs) {
            EXPECT_TRUE(g.bond_between(static_cast<std::size_t>(a), static_cast<std::size_t>(b)).has_value()) << s;
        }
        // atoms - 1 chain bonds (none of these has branches) plus one bond per ring pair
        EXPECT_EQ(g.bonds().size(), g.atoms().size() - 1 + pairs.size()) << s;
    }
}

TEST(Smiles, TwoDigitRingClosure) {
    const auto g = parse("C%10CC%10").at(0);
    EXPECT_EQ(g.bonds().size(), 3u);
    EXPECT_TRUE(g.bond_between(0, 2).has_value());
}

TEST(Smiles, BracketAtoms) {
    const auto g = parse("[13CH3][NH3+].[O-2]");
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0].atoms()[0].explicit_h, 3);
    EXPECT_EQ(g[0].atoms()[1].formal_charge, 1);
    EXPECT_EQ(g[0].atoms()[1].explicit_h, 3);
    EXPECT_EQ(g[1].atoms()[0].formal_charge, -2);
    EXPECT_EQ(g[1].atoms()[0].explicit_h, 0);
    EXPECT_EQ(implicit_hydrogens(g[1], 0), 0);
    EXPECT_FALSE(g[0].atoms()[0].aromatic);
}

TEST(Smiles, ChargeSpellings) {
    EXPECT_EQ(parse("[N++]").at(0).atoms()[0].formal_charge, 2);
    EXPECT_EQ(parse("[N+2]").at(0).atoms()[0].formal_charge, 2);
    EXPECT_EQ(parse("[O--]").at(0).atoms()[0].formal_charge, -2);
    EXPECT_EQ(parse("[O-]").at(0).atoms()[0].formal_charge, -1);
}

TEST(Smiles, StereoMarksIgnored) {
    const auto a = parse("F/C=C/F").at(0);
    const auto b = parse("FC=CF").at(0);
    EXPECT_EQ(a.atoms().size(), b.atoms().size());
    EXPECT_EQ(a.bonds().size(), b.bonds().size());
    const auto c = parse("N[C@@H](C)C(=O)O").at(0);
    EXPECT_EQ(c.atoms().size(), 6u);
    EXPECT_EQ(implicit_hydrogens(c, 1), 1);
}

TEST(Smiles, DotSeparatedComponents) {
    const auto g = parse("CCO.O.[NH4+]");
    ASSERT_EQ(g.size(), 3u);
    EXPECT_EQ(g[1].atoms().size(), 1u);
}

TEST(Smiles, ValenceViolationIsFlagged) {
    const auto g = parse("O(C)(C)(C)C").at(0);
    EXPECT_TRUE(g.valence_warning());
    EXPECT_EQ(implicit_hydrogens(g, 0), 0);
    EXPECT_FALSE(parse("CCO").at(0).valence_warning());
}

TEST(Smiles, HydrogenHandTable) {
    // smiles, atom, expected implicit hydrogens
    const std::vector<std::tuple<std::string, std::size_t, int>> table = {
        {"C", 0, 4},          {"CCO", 2, 1},       {"c1ccccc1", 3, 1},     {"Cc1ccccc1", 1, 0},
        {"C=O", 0, 2},        {"C#N", 0, 1},       {"C#N", 1, 0},          {"CC(=O)O", 1, 0},
        {"CC(=O)O", 3, 1},    {"c1ccncc1", 3, 0},  {"c1cc[nH]c1", 3, 1},   {"c1ccoc1", 3, 0},
        {"CN", 1, 2},         {"B(O)(O)O", 0, 0},  {"[NH4+]", 0, 4},       {"CS", 1, 1},
        {"FC(F)(F)F", 1, 0},  {"C[Si](C)(C)C", 1, 0}, {"CP", 1, 2},       {"CBr", 1, 0},
    };
    for (const auto& [s, atom, h] : table) EXPECT_EQ(implicit_hydrogens(parse(s).at(0), atom), h) << s << " atom " << atom;
}

TEST(Smiles, Corpus) {
    const auto rows = read_tsv(data_path("smiles_corpus.tsv"));
    ASSERT_EQ(rows.size(), 100u);
    for (const auto& r : rows) {
        const auto graphs = parse(r[0]);
        std::size_t atoms = 0, bonds = 0;
        int aromatic = 0, hydrogens = 0;
        for (const auto& g : graphs) {
            atoms += g.atoms().size();
            bonds += g.bonds().size();
            aromatic += aromatic_atoms(g);
            hydrogens += total_hydrogens(g);
        }
        EXPECT_EQ(atoms, std::stoul(r[1])) << r[0];
        EXPECT_EQ(bonds, std::stoul(r[2])) << r[0];
        EXPECT_EQ(aromatic, std::stoi(r[3])) << r[0];
        EXPECT_EQ(hydrogens, std::stoi(r[4])) << r[0];
    }
}

TEST(Smiles, CorpusGraphInvariants) {
    for (const auto& r : read_tsv(data_path("smiles_corpus.tsv"))) {
        for (const auto& g : parse(r[0])) {
            std::size_t degree_sum = 0;
            for (std::size_t i = 0; i < g.atoms().size(); ++i) {
                degree_sum += g.degree(i);
                for (const auto& nb : g.neighbors(i)) {
                    const auto& b = g.bonds()[nb.bond];
                    EXPECT_TRUE((b.a == i && b.b == nb.atom) || (b.b == i && b.a == nb.atom));
                }
            }
            EXPECT_EQ(degree_sum, 2 * g.bonds().size());
            std::set<std::pair<std::size_t, std::size_t>> seen;
            for (const auto& b : g.bonds()) {
                EXPECT_NE(b.a, b.b);
                EXPECT_TRUE(seen.insert(std::minmax(b.a, b.b)).second);
            }
            // connectivity by flood fill
            std::vector<bool> reached(g.atoms().size(), false);
            std::vector<std::size_t> stack{0};
            reached[0] = true;
            while (!stack.empty()) {
                const auto a = stack.back();
                stack.pop_back();
                for (const auto& nb : g.neighbors(a)) {
                    if (!reached[nb.atom]) {
                        reached[nb.atom] = true;
                        stack.push_back(nb.atom);
                    }
                }
            }
            EXPECT_TRUE(std::all_of(reached.begin(), reached.end(), [](bool v) { return v; })) << r[0];
            for (std::size_t i = 0; i < g.atoms().size(); ++i) EXPECT_EQ(g.atoms()[i].index, i);
        }
    }
}

TEST(Smiles, Deterministic) {
    for (const auto& r : read_tsv(data_path("smiles_corpus.tsv"))) {
        const auto a = parse(r[0]);
        const auto b = parse(r[0]);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t c = 0; c < a.size(); ++c) {
            ASSERT_EQ(a[c].bonds().size(), b[c].bonds().size());
            for (std::size_t i = 0; i < a[c].bonds().size(); ++i) {
                EXPECT_EQ(a[c].bonds()[i].a, b[c].bonds()[i].a);
                EXPECT_EQ(a[c].bonds()[i].b, b[c].bonds()[i].b);
                EXPECT_EQ(a[c].bonds()[i].order, b[c].bonds()[i].order);
            }
        }
    }
}

TEST(Smiles, MalformedFixtures) {
    const auto rows = read_tsv(data_path("smiles_malformed.tsv"));
    ASSERT_GE(rows.size(), 20u);
    for (const auto& r : rows) {
        try {
            parse(r[0]);
            ADD_FAILURE() << "accepted '" << r[0] << "'";
        } catch (const ParseError& e) {
            EXPECT_EQ(kind_code(e.kind()), r[1]) << r[0];
            EXPECT_EQ(e.code(), r[1]) << r[0];
            EXPECT_EQ(e.offset(), std::stoul(r[2])) << r[0] << ": " << e.what();
            if (!r[0].empty()) EXPECT_LT(e.offset(), r[0].size());
        }
    }
}

TEST(Smiles, UnclosedRingOffset) {
    try {
        parse("C1CC");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.kind(), ParseErrorKind::UnclosedRing);
        EXPECT_EQ(e.offset(), 1u);
    }
}

TEST(Smiles, RandomGarbageNeverEscapesAsOtherErrors) {
    const std::string alphabet = "CNOcnos()[]=#:-+123%.@/\\HBrClX ";
    std::uint64_t state = 12345;
    for (int trial = 0; trial < 5000; ++trial) {
        std::string s;
        const int len = 1 + static_cast<int>(state % 12);
        for (int i = 0; i < len; ++i) {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            s += alphabet[(state >> 33) % alphabet.size()];
        }
        try {
            const auto graphs = parse(s);
            for (const auto& g : graphs) EXPECT_FALSE(g.atoms().empty());
        } catch (const ParseError& e) {
            EXPECT_LT(e.offset(), std::max<std::size_t>(s.size(), 1)) << s;
        }
    }
}
