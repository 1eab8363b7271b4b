#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qbench {

using cxd = std::complex<double>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingBinding : Error {
    using Error::Error;
};
struct UnsupportedGate : Error {
    using Error::Error;
};
struct NotUnitary : Error {
    using Error::Error;
};
struct NumericalBreakdown : Error {
    using Error::Error;
};
struct WidthLimitExceeded : Error {
    using Error::Error;
};
struct WidthMismatch : Error {
    using Error::Error;
};
struct DegenerateIdeal : Error {
    using Error::Error;
};
struct UnboundParameter : Error {
    using Error::Error;
};
struct InvalidSize : Error {
    using Error::Error;
};
struct InvalidInstance : Error {
    using Error::Error;
};
struct InvalidQv : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

enum class GateKind {
    X,
    H,
    RX,
    RY,
    RZ,
    CX,
    CZ,
    CP,
    SWAP,
    CCX,
    MCX,
    U2Q,
    Measure,
    Reset,
    Barrier,
};

inline const char* gate_name(GateKind k) {
    switch (k) {
    case GateKind::X: return "x";
    case GateKind::H: return "h";
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::CX: return "cx";
    case GateKind::CZ: return "cz";
    case GateKind::CP: return "cp";
    case GateKind::SWAP: return "swap";
    case GateKind::CCX: return "ccx";
    case GateKind::MCX: return "mcx";
    case GateKind::U2Q: return "u2q";
    case GateKind::Measure: return "measure";
    case GateKind::Reset: return "reset";
    case GateKind::Barrier: return "barrier";
    }
    return "?";
}

inline std::optional<GateKind> gate_kind_from_name(const std::string& s) {
    static const std::map<std::string, GateKind> table = {
        {"x", GateKind::X},       {"h", GateKind::H},     {"rx", GateKind::RX},
        {"ry", GateKind::RY},     {"rz", GateKind::RZ},   {"cx", GateKind::CX},
        {"cz", GateKind::CZ},     {"cp", GateKind::CP},   {"swap", GateKind::SWAP},
        {"ccx", GateKind::CCX},   {"mcx", GateKind::MCX}, {"u2q", GateKind::U2Q},
        {"measure", GateKind::Measure}, {"reset", GateKind::Reset}, {"barrier", GateKind::Barrier},
    };
    auto it = table.find(s);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

/// Rotation / phase angle, either a bound value or a named symbol awaiting
/// bind_params (the bound value is scale * binding[symbol]).
struct Param {
    double value = 0.0;
    std::string symbol; // non-empty means symbolic
    double scale = 1.0;

    Param() = default;
    Param(double v) : value(v) {}
    static Param sym(std::string name) {
        Param p;
        p.symbol = std::move(name);
        return p;
    }
    static Param sym_scaled(std::string name, double scale) {
        Param p;
        p.symbol = std::move(name);
        p.scale = scale;
        return p;
    }
    bool symbolic() const { return !symbol.empty(); }
};

struct Condition {
    std::uint32_t clbit = 0;
    int value = 1; // required classical value, 0 or 1
};

struct Gate {
    GateKind kind = GateKind::Barrier;
    std::vector<std::uint32_t> qubits;
    std::vector<Param> params;
    std::int32_t clbit = -1; // measure result target
    std::optional<Condition> condition;
    std::shared_ptr<const Eigen::Matrix4cd> matrix; // U2Q payload

    bool is_unitary() const {
        return kind != GateKind::Measure && kind != GateKind::Reset && kind != GateKind::Barrier;
    }
};

/// Gate sequence over a fixed-width qubit register plus classical bits.
/// Circuits are plain values: build one, then treat it as immutable.
class Circuit {
public:
    Circuit() = default;
    explicit Circuit(std::uint32_t width, std::uint32_t clbits = 0, std::string name = "")
        : width_(width), clbits_(clbits), name_(std::move(name)) {}

    std::uint32_t width() const { return width_; }
    std::uint32_t num_clbits() const { return clbits_; }
    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }
    const std::string& tag() const { return tag_; }
    void set_tag(std::string t) { tag_ = std::move(t); }

    const std::vector<Gate>& gates() const { return gates_; }
    std::size_t size() const { return gates_.size(); }

    void append(Gate g) { gates_.push_back(std::move(g)); }
    void append_all(const std::vector<Gate>& gs) {
        gates_.insert(gates_.end(), gs.begin(), gs.end());
    }

    Circuit& x(std::uint32_t q) { return add(GateKind::X, {q}); }
    Circuit& h(std::uint32_t q) { return add(GateKind::H, {q}); }
    Circuit& rx(Param theta, std::uint32_t q) { return add(GateKind::RX, {q}, {theta}); }
    Circuit& ry(Param theta, std::uint32_t q) { return add(GateKind::RY, {q}, {theta}); }
    Circuit& rz(Param theta, std::uint32_t q) { return add(GateKind::RZ, {q}, {theta}); }
    Circuit& cx(std::uint32_t c, std::uint32_t t) { return add(GateKind::CX, {c, t}); }
    Circuit& cz(std::uint32_t a, std::uint32_t b) { return add(GateKind::CZ, {a, b}); }
    Circuit& cp(Param theta, std::uint32_t c, std::uint32_t t) {
        return add(GateKind::CP, {c, t}, {theta});
    }
    Circuit& swap(std::uint32_t a, std::uint32_t b) { return add(GateKind::SWAP, {a, b}); }
    Circuit& ccx(std::uint32_t c0, std::uint32_t c1, std::uint32_t t) {
        return add(GateKind::CCX, {c0, c1, t});
    }
    Circuit& mcx(std::vector<std::uint32_t> controls, std::uint32_t t) {
        controls.push_back(t);
        return add(GateKind::MCX, std::move(controls));
    }
    Circuit& u2q(const Eigen::Matrix4cd& m, std::uint32_t q0, std::uint32_t q1) {
        Gate g;
        g.kind = GateKind::U2Q;
        g.qubits = {q0, q1};
        g.matrix = std::make_shared<Eigen::Matrix4cd>(m);
        gates_.push_back(std::move(g));
        return *this;
    }
    Circuit& measure(std::uint32_t q, std::uint32_t c) {
        Gate g;
        g.kind = GateKind::Measure;
        g.qubits = {q};
        g.clbit = static_cast<std::int32_t>(c);
        gates_.push_back(std::move(g));
        return *this;
    }
    Circuit& reset(std::uint32_t q) { return add(GateKind::Reset, {q}); }
    Circuit& barrier() { return add(GateKind::Barrier, {}); }

    /// Condition the most recently appended gate on a classical bit.
    Circuit& if_bit(std::uint32_t clbit, int value = 1) {
        gates_.back().condition = Condition{clbit, value};
        return *this;
    }

    /// Appends the other circuit's gates verbatim (widths must agree).
    Circuit& extend(const Circuit& other) {
        append_all(other.gates());
        return *this;
    }

private:
    Circuit& add(GateKind k, std::vector<std::uint32_t> qs, std::vector<Param> ps = {}) {
        Gate g;
        g.kind = k;
        g.qubits = std::move(qs);
        g.params = std::move(ps);
        gates_.push_back(std::move(g));
        return *this;
    }

    std::uint32_t width_ = 0;
    std::uint32_t clbits_ = 0;
    std::string name_;
    std::string tag_;
    std::vector<Gate> gates_;
};

/// Inverse of a unitary gate: rotations and phases negate their angle
/// (symbolic ones negate the scale), u2q takes the adjoint, the rest are
/// self-inverse.
inline Gate inverted_gate(const Gate& g) {
    Gate out = g;
    switch (g.kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::CP:
        for (Param& p : out.params) {
            if (p.symbolic())
                p.scale = -p.scale;
            else
                p.value = -p.value;
        }
        break;
    case GateKind::U2Q:
        out.matrix = std::make_shared<Eigen::Matrix4cd>(g.matrix->adjoint());
        break;
    case GateKind::Measure:
    case GateKind::Reset: throw Error("cannot invert a non-unitary gate");
    default: break; // self-inverse
    }
    return out;
}

/// Appends the inverse of a unitary gate sequence (reversed, gate-inverted).
inline void append_inverse(Circuit& c, const std::vector<Gate>& seq) {
    for (auto it = seq.rbegin(); it != seq.rend(); ++it) c.append(inverted_gate(*it));
}

/// Layer count under greedy ASAP scheduling that respects per-qubit gate
/// order. Gates on disjoint qubits share a layer; barriers force a boundary
/// across all qubits but add no depth of their own; measure and reset occupy
/// their qubit like any other gate.
inline int depth(const Circuit& c) {
    std::vector<int> level(c.width(), 0);
    int max_level = 0;
    for (const Gate& g : c.gates()) {
        if (g.kind == GateKind::Barrier) {
            int m = 0;
            for (int l : level) m = std::max(m, l);
            std::fill(level.begin(), level.end(), m);
            continue;
        }
        int layer = 0;
        for (auto q : g.qubits) layer = std::max(layer, level[q]);
        ++layer;
        for (auto q : g.qubits) level[q] = layer;
        max_level = std::max(max_level, layer);
    }
    return max_level;
}

inline bool has_symbols(const Circuit& c) {
    for (const Gate& g : c.gates())
        for (const Param& p : g.params)
            if (p.symbolic()) return true;
    return false;
}

/// Substitutes every symbolic parameter. Symbols present in the binding but
/// absent from the circuit are collected as warnings (and otherwise ignored,
/// so one parameter table can serve a whole circuit family).
inline Circuit bind_params(const Circuit& c, const std::map<std::string, double>& binding,
                           std::vector<std::string>* unknown_symbol_warnings = nullptr) {
    std::map<std::string, bool> used;
    for (auto& [name, v] : binding) used[name] = false;
    Circuit bound(c.width(), c.num_clbits(), c.name());
    bound.set_tag(c.tag());
    for (Gate g : c.gates()) {
        for (Param& p : g.params) {
            if (!p.symbolic()) continue;
            auto it = binding.find(p.symbol);
            if (it == binding.end()) throw MissingBinding("unbound parameter symbol: " + p.symbol);
            used[it->first] = true;
            p = Param(p.scale * it->second);
        }
        bound.append(std::move(g));
    }
    if (unknown_symbol_warnings) {
        for (auto& [name, was_used] : used)
            if (!was_used) unknown_symbol_warnings->push_back("binding names unknown symbol: " + name);
    }
    return bound;
}

struct Violation {
    std::size_t gate_index;
    std::string message;
};

inline double unitarity_defect(const Eigen::MatrixXcd& u) {
    Eigen::MatrixXcd d = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

/// Collects every invariant violation with its gate position. Diagnostics
/// only; nothing is thrown.
inline std::vector<Violation> validate(const Circuit& c) {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < c.gates().size(); ++i) {
        const Gate& g = c.gates()[i];
        std::vector<std::uint32_t> sorted(g.qubits);
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            out.push_back({i, "duplicate qubit at gate " + std::to_string(i)});
        for (auto q : g.qubits)
            if (q >= c.width()) out.push_back({i, "qubit index out of range at gate " + std::to_string(i)});
        if (g.kind == GateKind::Measure) {
            if (g.qubits.size() != 1) out.push_back({i, "measure must carry exactly one qubit"});
            if (g.clbit < 0 || static_cast<std::uint32_t>(g.clbit) >= c.num_clbits())
                out.push_back({i, "classical bit index out of range at gate " + std::to_string(i)});
        }
        if (g.kind == GateKind::Reset && g.qubits.size() != 1)
            out.push_back({i, "reset must carry exactly one qubit"});
        if (g.condition && g.condition->clbit >= c.num_clbits())
            out.push_back({i, "condition classical bit out of range at gate " + std::to_string(i)});
        if (g.kind == GateKind::U2Q) {
            if (!g.matrix)
                out.push_back({i, "u2q gate carries no matrix"});
            else if (unitarity_defect(*g.matrix) > 1e-10)
                out.push_back({i, "u2q matrix is not unitary at gate " + std::to_string(i)});
        }
    }
    return out;
}

inline void require_valid(const Circuit& c) {
    auto v = validate(c);
    if (!v.empty()) throw Error("invalid circuit: " + v.front().message);
}

namespace detail {
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace detail

/// Textual dump, one gate per line: `name q... [@ params] [?c=v]`.
/// Measure lines are `measure q c`. Doubles are printed round-trip exact,
/// so equal circuits dump to identical bytes. Full grammar in
/// docs/circuit-format.md.
inline std::string dump(const Circuit& c) {
    std::ostringstream os;
    os << "# circuit " << (c.name().empty() ? "-" : c.name()) << " w=" << c.width()
       << " c=" << c.num_clbits() << "\n";
    for (const Gate& g : c.gates()) {
        os << gate_name(g.kind);
        for (auto q : g.qubits) os << ' ' << q;
        if (g.kind == GateKind::Measure) os << ' ' << g.clbit;
        if (g.kind == GateKind::U2Q) {
            os << " @";
            for (int col = 0; col < 4; ++col)
                for (int row = 0; row < 4; ++row) {
                    const cxd v = (*g.matrix)(row, col);
                    os << ' ' << detail::fmt_double(v.real()) << ',' << detail::fmt_double(v.imag());
                }
        } else if (!g.params.empty()) {
            os << " @";
            for (const Param& p : g.params) {
                if (p.symbolic()) {
                    os << " $" << p.symbol;
                    if (p.scale != 1.0) os << '*' << detail::fmt_double(p.scale);
                } else {
                    os << ' ' << detail::fmt_double(p.value);
                }
            }
        }
        if (g.condition) os << " ?" << g.condition->clbit << '=' << g.condition->value;
        os << '\n';
    }
    return os.str();
}

/// Parses the dump format back into a circuit. Width and classical-bit count
/// come from the header comment when present, otherwise they are inferred.
inline Circuit parse_dump(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    Circuit c;
    bool have_header = false;
    std::uint32_t max_q = 0, max_c = 0;
    std::vector<Gate> gates;
    std::string name;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line);
            std::string hash, kw;
            hs >> hash >> kw;
            if (kw == "circuit") {
                std::string nm, wtok, ctok;
                hs >> nm >> wtok >> ctok;
                std::uint32_t w = std::stoul(wtok.substr(2));
                std::uint32_t nc = std::stoul(ctok.substr(2));
                c = Circuit(w, nc, nm == "-" ? "" : nm);
                have_header = true;
            }
            continue;
        }
        std::istringstream ls(line);
        std::string nm;
        ls >> nm;
        auto kind = gate_kind_from_name(nm);
        if (!kind) throw IoError("unknown gate in dump: " + nm);
        Gate g;
        g.kind = *kind;
        std::string tok;
        std::vector<std::string> param_toks;
        bool in_params = false;
        std::vector<std::int64_t> ints;
        while (ls >> tok) {
            if (tok == "@") {
                in_params = true;
            } else if (tok[0] == '?') {
                auto eq = tok.find('=');
                g.condition = Condition{static_cast<std::uint32_t>(std::stoul(tok.substr(1, eq - 1))),
                                        std::stoi(tok.substr(eq + 1))};
            } else if (in_params) {
                param_toks.push_back(tok);
            } else {
                ints.push_back(std::stoll(tok));
            }
        }
        if (g.kind == GateKind::Measure) {
            if (ints.size() != 2) throw IoError("measure line needs qubit and clbit");
            g.qubits = {static_cast<std::uint32_t>(ints[0])};
            g.clbit = static_cast<std::int32_t>(ints[1]);
            max_c = std::max(max_c, static_cast<std::uint32_t>(g.clbit) + 1);
        } else {
            for (auto v : ints) g.qubits.push_back(static_cast<std::uint32_t>(v));
        }
        for (auto q : g.qubits) max_q = std::max(max_q, q + 1);
        if (g.condition) max_c = std::max(max_c, g.condition->clbit + 1);
        if (g.kind == GateKind::U2Q) {
            if (param_toks.size() != 16) throw IoError("u2q line needs 16 complex entries");
            auto m = std::make_shared<Eigen::Matrix4cd>();
            for (int k = 0; k < 16; ++k) {
                auto comma = param_toks[k].find(',');
                (*m)(k % 4, k / 4) = cxd(std::stod(param_toks[k].substr(0, comma)),
                                         std::stod(param_toks[k].substr(comma + 1)));
            }
            g.matrix = std::move(m);
        } else {
            for (auto& t : param_toks) {
                if (t[0] == '$') {
                    const auto star = t.find('*');
                    if (star == std::string::npos)
                        g.params.push_back(Param::sym(t.substr(1)));
                    else
                        g.params.push_back(Param::sym_scaled(t.substr(1, star - 1),
                                                             std::stod(t.substr(star + 1))));
                } else {
                    g.params.push_back(Param(std::stod(t)));
                }
            }
        }
        gates.push_back(std::move(g));
    }
    if (!have_header) c = Circuit(max_q, max_c);
    for (auto& g : gates) c.append(std::move(g));
    return c;
}

} // namespace qbench
