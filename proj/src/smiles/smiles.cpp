#include "moleda/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace moleda::smiles {

std::string_view symbol(Element e) noexcept {
    switch (e) {
        case Element::H: return "H";
        case Element::B: return "B";
        case Element::C: return "C";
        case Element::N: return "N";
        case Element::O: return "O";
        case Element::F: return "F";
        case Element::Si: return "Si";
        case Element::P: return "P";
        case Element::S: return "S";
        case Element::Cl: return "Cl";
        case Element::Br: return "Br";
        case Element::I: return "I";
    }
    return "?";
}

int default_valence(Element e) noexcept {
    switch (e) {
        case Element::H: return 1;
        case Element::B: return 3;
        case Element::C: return 4;
        case Element::N: return 3;
        case Element::O: return 2;
        case Element::F: return 1;
        case Element::Si: return 4;
        case Element::P: return 3;
        case Element::S: return 2;
        case Element::Cl: return 1;
        case Element::Br: return 1;
        case Element::I: return 1;
    }
    return 0;
}

char bond_symbol(BondOrder order) noexcept {
    switch (order) {
        case BondOrder::Single: return '-';
        case BondOrder::Double: return '=';
        case BondOrder::Triple: return '#';
        case BondOrder::Aromatic: return ':';
    }
    return '?';
}

std::optional<std::size_t> MolecularGraph::bond_between(std::size_t a, std::size_t b) const {
    for (const auto& nb : adjacency_.at(a)) {
        if (nb.atom == b) return nb.bond;
    }
    return std::nullopt;
}

namespace {

const char* kind_name(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::EmptyInput: return "empty_input";
        case ParseErrorKind::UnclosedRing: return "unclosed_ring";
        case ParseErrorKind::UnbalancedParen: return "unbalanced_paren";
        case ParseErrorKind::UnknownElement: return "unknown_element";
        case ParseErrorKind::Syntax: return "smiles_syntax";
    }
    return "smiles_syntax";
}

/// Bond order sum in half units (aromatic = 3 halves).
int half_order(BondOrder order) {
    switch (order) {
        case BondOrder::Single: return 2;
        case BondOrder::Double: return 4;
        case BondOrder::Triple: return 6;
        case BondOrder::Aromatic: return 3;
    }
    return 0;
}

int bond_order_floor(const MolecularGraph& g, std::size_t atom) {
    int halves = 0;
    for (const auto& nb : g.neighbors(atom)) halves += half_order(g.bonds()[nb.bond].order);
    return halves / 2;
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, const std::string& message)
    : InvalidArgument(kind_name(kind), message + " at offset " + std::to_string(offset)),
      kind_(kind),
      offset_(offset) {}

class GraphBuilder {
public:
    explicit GraphBuilder(std::string source) { graph_.source_ = std::move(source); }

    bool empty() const { return graph_.atoms_.empty(); }
    const Atom& atom(std::size_t i) const { return graph_.atoms_[i]; }
    bool bonded(std::size_t a, std::size_t b) const { return graph_.bond_between(a, b).has_value(); }

    std::size_t add_atom(Atom atom) {
        atom.index = graph_.atoms_.size();
        graph_.atoms_.push_back(atom);
        graph_.adjacency_.emplace_back();
        return atom.index;
    }

    void add_bond(std::size_t a, std::size_t b, BondOrder order) {
        const std::size_t id = graph_.bonds_.size();
        graph_.bonds_.push_back({a, b, order});
        graph_.adjacency_[a].push_back({b, id});
        graph_.adjacency_[b].push_back({a, id});
    }

    MolecularGraph finish() {
        for (const auto& a : graph_.atoms_) {
            if (a.explicit_h) continue;
            if (bond_order_floor(graph_, a.index) > default_valence(a.element)) graph_.valence_warning_ = true;
        }
        return std::move(graph_);
    }

private:
    MolecularGraph graph_;
};

namespace {

struct OpenRing {
    std::size_t atom;
    std::optional<BondOrder> order;
    std::size_t offset;
};

struct Branch {
    std::size_t atom;
    std::size_t offset;
    bool has_atom = false;
};

class Parser {
public:
    Parser(std::string_view text, std::size_t base) : text_(text), base_(base) {}

    std::vector<MolecularGraph> run() {
        start_component();
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '[' || std::isalpha(static_cast<unsigned char>(c))) {
                atom_token();
            } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
                bond_token(c);
            } else if (c == '(') {
                if (!prev_) fail(ParseErrorKind::Syntax, pos_, "branch without a preceding atom");
                if (pending_) fail(ParseErrorKind::Syntax, pending_offset_, "bond symbol before '('");
                branches_.push_back({*prev_, pos_});
                ++pos_;
            } else if (c == ')') {
                if (branches_.empty()) fail(ParseErrorKind::UnbalancedParen, pos_, "unmatched ')'");
                if (pending_) fail(ParseErrorKind::Syntax, pending_offset_, "bond symbol before ')'");
                if (!branches_.back().has_atom) fail(ParseErrorKind::Syntax, pos_, "empty branch");
                prev_ = branches_.back().atom;
                branches_.pop_back();
                ++pos_;
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
                ring_token();
            } else if (c == '.') {
                end_component(pos_);
                ++pos_;
                start_component();
                dot_offset_ = pos_ - 1;
            } else {
                fail(ParseErrorKind::Syntax, pos_, std::string("unexpected character '") + c + "'");
            }
        }
        end_component(text_.size());
        return std::move(graphs_);
    }

private:
    [[noreturn]] void fail(ParseErrorKind kind, std::size_t offset, const std::string& message) const {
        throw ParseError(kind, base_ + offset, message);
    }

    void start_component() {
        builder_.emplace(std::string(text_));
        prev_.reset();
        pending_.reset();
    }

    void end_component(std::size_t at) {
        if (!branches_.empty()) fail(ParseErrorKind::UnbalancedParen, branches_.back().offset, "unclosed '('");
        if (pending_) fail(ParseErrorKind::Syntax, pending_offset_, "dangling bond symbol");
        if (!rings_.empty()) {
            auto first = std::min_element(rings_.begin(), rings_.end(), [](const auto& x, const auto& y) {
                return x.second.offset < y.second.offset;
            });
            fail(ParseErrorKind::UnclosedRing, first->second.offset, "ring bond " + std::to_string(first->first) + " never closed");
        }
        if (builder_->empty()) {
            const std::size_t off = dot_offset_ ? *dot_offset_ : std::min(at, text_.size() - 1);
            fail(ParseErrorKind::Syntax, off, "empty component");
        }
        graphs_.push_back(builder_->finish());
    }

    void connect(std::size_t atom) {
        if (prev_) {
            BondOrder order = pending_.value_or(default_order(*prev_, atom));
            builder_->add_bond(*prev_, atom, order);
        } else if (pending_) {
            fail(ParseErrorKind::Syntax, pending_offset_, "bond symbol without a preceding atom");
        }
        if (!branches_.empty()) branches_.back().has_atom = true;
        pending_.reset();
        prev_ = atom;
    }

    BondOrder default_order(std::size_t a, std::size_t b) const {
        return builder_->atom(a).aromatic && builder_->atom(b).aromatic ? BondOrder::Aromatic : BondOrder::Single;
    }

    void bond_token(char c) {
        if (pending_) fail(ParseErrorKind::Syntax, pos_, "consecutive bond symbols");
        if (!prev_) fail(ParseErrorKind::Syntax, pos_, "bond symbol without a preceding atom");
        switch (c) {
            case '=': pending_ = BondOrder::Double; break;
            case '#': pending_ = BondOrder::Triple; break;
            case ':': pending_ = BondOrder::Aromatic; break;
            default: pending_ = BondOrder::Single; break;
        }
        pending_offset_ = pos_;
        ++pos_;
    }

    void ring_token() {
        const std::size_t start = pos_;
        int number = 0;
        if (text_[pos_] == '%') {
            if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
                !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
                fail(ParseErrorKind::Syntax, pos_, "'%' must be followed by two digits");
            }
            number = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
            pos_ += 3;
        } else {
            number = text_[pos_] - '0';
            ++pos_;
        }
        if (!prev_) fail(ParseErrorKind::Syntax, start, "ring bond without a preceding atom");

        auto it = rings_.find(number);
        if (it == rings_.end()) {
            rings_.emplace(number, OpenRing{*prev_, pending_, start});
            pending_.reset();
            return;
        }
        const OpenRing open = it->second;
        rings_.erase(it);
        if (open.atom == *prev_) fail(ParseErrorKind::Syntax, start, "ring bond to the same atom");
        if (builder_->bonded(open.atom, *prev_)) fail(ParseErrorKind::Syntax, start, "duplicate bond");
        if (open.order && pending_ && *open.order != *pending_) {
            fail(ParseErrorKind::Syntax, start, "conflicting ring bond orders");
        }
        const BondOrder order = pending_ ? *pending_ : open.order ? *open.order : default_order(open.atom, *prev_);
        builder_->add_bond(open.atom, *prev_, order);
        pending_.reset();
    }

    void atom_token() {
        Atom atom;
        if (text_[pos_] == '[') {
            bracket_atom(atom);
        } else {
            organic_atom(atom);
        }
        connect(builder_->add_atom(atom));
    }

    void organic_atom(Atom& atom) {
        const char c = text_[pos_];
        const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
        std::size_t len = 1;
        switch (c) {
            case 'B':
                if (next == 'r') {
                    atom.element = Element::Br;
                    len = 2;
                } else {
                    atom.element = Element::B;
                }
                break;
            case 'C':
                if (next == 'l') {
                    atom.element = Element::Cl;
                    len = 2;
                } else {
                    atom.element = Element::C;
                }
                break;
            case 'N': atom.element = Element::N; break;
            case 'O': atom.element = Element::O; break;
            case 'P': atom.element = Element::P; break;
            case 'S': atom.element = Element::S; break;
            case 'F': atom.element = Element::F; break;
            case 'I': atom.element = Element::I; break;
            case 'b': atom.element = Element::B; atom.aromatic = true; break;
            case 'c': atom.element = Element::C; atom.aromatic = true; break;
            case 'n': atom.element = Element::N; atom.aromatic = true; break;
            case 'o': atom.element = Element::O; atom.aromatic = true; break;
            case 'p': atom.element = Element::P; atom.aromatic = true; break;
            case 's': atom.element = Element::S; atom.aromatic = true; break;
            default:
                fail(ParseErrorKind::UnknownElement, pos_, std::string("unknown element '") + c + "'");
        }
        pos_ += len;
    }

    bool match(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

    void bracket_atom(Atom& atom) {
        const std::size_t open = pos_;
        ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;  // isotope
        if (pos_ >= text_.size()) fail(ParseErrorKind::Syntax, open, "unterminated bracket atom");

        struct Sym {
            std::string_view text;
            Element element;
            bool aromatic;
        };
        static constexpr Sym kSymbols[] = {
            {"Si", Element::Si, false}, {"Cl", Element::Cl, false}, {"Br", Element::Br, false},
            {"H", Element::H, false},   {"B", Element::B, false},   {"C", Element::C, false},
            {"N", Element::N, false},   {"O", Element::O, false},   {"F", Element::F, false},
            {"P", Element::P, false},   {"S", Element::S, false},   {"I", Element::I, false},
            {"b", Element::B, true},    {"c", Element::C, true},    {"n", Element::N, true},
            {"o", Element::O, true},    {"p", Element::P, true},    {"s", Element::S, true},
        };
        const std::size_t sym_start = pos_;
        const Sym* found = nullptr;
        for (const auto& s : kSymbols) {
            if (match(s.text)) {
                found = &s;
                break;
            }
        }
        // A single uppercase match followed by a lowercase letter is a different element (e.g. "Na", "Sn").
        if (found && found->text.size() == 1 && !found->aromatic && pos_ + 1 < text_.size() &&
            std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
            found = nullptr;
        }
        if (!found) fail(ParseErrorKind::UnknownElement, sym_start, "unsupported element in bracket atom");
        atom.element = found->element;
        atom.aromatic = found->aromatic;
        pos_ += found->text.size();

        if (pos_ < text_.size() && text_[pos_] == '@') {
            while (pos_ < text_.size() && text_[pos_] == '@') ++pos_;
            while (pos_ < text_.size() && (std::isupper(static_cast<unsigned char>(text_[pos_])) &&
                                           text_[pos_] != 'H')) {
                ++pos_;
            }
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }

        int hcount = 0;
        if (pos_ < text_.size() && text_[pos_] == 'H') {
            ++pos_;
            hcount = 1;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                hcount = text_[pos_] - '0';
                ++pos_;
            }
        }
        atom.explicit_h = hcount;

        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
            const char sign = text_[pos_];
            const int unit = sign == '+' ? 1 : -1;
            ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                int magnitude = 0;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    magnitude = magnitude * 10 + (text_[pos_] - '0');
                    ++pos_;
                }
                atom.formal_charge = unit * magnitude;
            } else {
                int magnitude = 1;
                while (pos_ < text_.size() && text_[pos_] == sign) {
                    ++magnitude;
                    ++pos_;
                }
                atom.formal_charge = unit * magnitude;
            }
        }

        if (pos_ < text_.size() && text_[pos_] == ':') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ >= text_.size() || text_[pos_] != ']') {
            fail(ParseErrorKind::Syntax, pos_ < text_.size() ? pos_ : open, "expected ']'");
        }
        ++pos_;
    }

    std::string_view text_;
    std::size_t base_;
    std::size_t pos_ = 0;
    std::optional<GraphBuilder> builder_;
    std::optional<std::size_t> prev_;
    std::optional<BondOrder> pending_;
    std::size_t pending_offset_ = 0;
    std::optional<std::size_t> dot_offset_;
    std::vector<Branch> branches_;
    std::map<int, OpenRing> rings_;
    std::vector<MolecularGraph> graphs_;
};

}  // namespace

std::vector<MolecularGraph> parse(std::string_view text) {
    const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    std::size_t first = 0;
    while (first < text.size() && is_space(text[first])) ++first;
    std::size_t last = text.size();
    while (last > first && is_space(text[last - 1])) --last;
    if (first == last) throw ParseError(ParseErrorKind::EmptyInput, 0, "empty SMILES");
    return Parser(text.substr(first, last - first), first).run();
}

int implicit_hydrogens(const MolecularGraph& graph, std::size_t atom) {
    const Atom& a = graph.atoms().at(atom);
    if (a.explicit_h) return *a.explicit_h;
    return std::max(0, default_valence(a.element) - bond_order_floor(graph, atom));
}

int total_hydrogens(const MolecularGraph& graph) {
    int total = 0;
    for (std::size_t i = 0; i < graph.atoms().size(); ++i) total += implicit_hydrogens(graph, i);
    return total;
}

}  // namespace moleda::smiles
