#pragma once

#include <cctype>
#include <complex>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qbench/circuit.hpp"
#include "qbench/transpile.hpp"

namespace qbench {

/// Weighted sum of Pauli words. Words are strings over {I,X,Y,Z}; character
/// j acts on qubit j.
class PauliOp {
public:
    PauliOp() = default;
    explicit PauliOp(std::size_t n) : n_(n) {}

    static PauliOp term(std::string word, cxd coeff) {
        PauliOp op(word.size());
        op.terms_[std::move(word)] = coeff;
        return op;
    }

    std::size_t num_qubits() const { return n_; }
    const std::map<std::string, cxd>& terms() const { return terms_; }

    PauliOp& operator+=(const PauliOp& other) {
        for (auto& [w, c] : other.terms_) add(w, c);
        return *this;
    }
    PauliOp& operator-=(const PauliOp& other) {
        for (auto& [w, c] : other.terms_) add(w, -c);
        return *this;
    }
    PauliOp operator*(const PauliOp& rhs) const {
        PauliOp out(std::max(n_, rhs.n_));
        for (auto& [wa, ca] : terms_)
            for (auto& [wb, cb] : rhs.terms_) {
                auto [word, phase] = multiply_words(wa, wb);
                out.add(word, ca * cb * phase);
            }
        return out;
    }
    PauliOp operator*(cxd s) const {
        PauliOp out = *this;
        for (auto& [w, c] : out.terms_) c *= s;
        return out;
    }

    PauliOp adjoint() const {
        PauliOp out(n_);
        for (auto& [w, c] : terms_) out.terms_[w] = std::conj(c); // Pauli words are Hermitian
        return out;
    }

    void prune(double eps = 1e-14) {
        for (auto it = terms_.begin(); it != terms_.end();)
            it = std::abs(it->second) < eps ? terms_.erase(it) : std::next(it);
    }

private:
    void add(const std::string& w, cxd c) {
        auto [it, inserted] = terms_.try_emplace(w, c);
        if (!inserted) it->second += c;
    }

    static std::pair<std::string, cxd> multiply_words(const std::string& a, const std::string& b) {
        std::string out(std::max(a.size(), b.size()), 'I');
        cxd phase{1.0, 0.0};
        const cxd i{0.0, 1.0};
        for (std::size_t k = 0; k < out.size(); ++k) {
            const char pa = k < a.size() ? a[k] : 'I';
            const char pb = k < b.size() ? b[k] : 'I';
            if (pa == 'I') {
                out[k] = pb;
            } else if (pb == 'I') {
                out[k] = pa;
            } else if (pa == pb) {
                out[k] = 'I';
            } else {
                // XY=iZ, YZ=iX, ZX=iY and the reversed products pick up -i.
                static const std::string cyc = "XYZ";
                const int ia = static_cast<int>(cyc.find(pa));
                const int ib = static_cast<int>(cyc.find(pb));
                out[k] = cyc[3 - ia - ib];
                phase *= ((ib - ia + 3) % 3 == 1) ? i : -i;
            }
        }
        return {out, phase};
    }

    std::size_t n_ = 0;
    std::map<std::string, cxd> terms_;
};

/// Jordan-Wigner image of a creation (dagger = true) or annihilation
/// operator on mode p of an n-mode register: (X -+ iY)/2 on qubit p with a Z
/// string on all higher qubits.
inline PauliOp jordan_wigner(std::size_t p, std::size_t n, bool dagger) {
    if (p >= n) throw Error("jordan_wigner: index out of range");
    std::string base(n, 'I');
    for (std::size_t q = p + 1; q < n; ++q) base[q] = 'Z';
    std::string xw = base, yw = base;
    xw[p] = 'X';
    yw[p] = 'Y';
    PauliOp op = PauliOp::term(xw, 0.5);
    op += PauliOp::term(yw, cxd{0.0, dagger ? -0.5 : 0.5});
    return op;
}

/// One real-coefficient Pauli term of an anti-Hermitian generator; the
/// generator is -i * sum_j coefficient_j * word_j, so each term exponentiates
/// as exp(-i * coefficient * word).
struct PauliTerm {
    double coefficient = 0.0;
    std::string word;
};
using PauliTermList = std::vector<PauliTerm>;

/// Real Pauli expansion of the anti-Hermitian operator op (which must
/// satisfy op^dagger = -op): returns terms with op = -i sum_j g_j P_j.
inline PauliTermList anti_hermitian_terms(PauliOp op) {
    op.prune();
    PauliTermList out;
    for (auto& [w, c] : op.terms()) {
        if (std::abs(c.real()) > 1e-10)
            throw Error("anti_hermitian_terms: operator is not anti-Hermitian");
        out.push_back({-c.imag(), w}); // c = -i g  =>  g = -imag(c)
    }
    return out;
}

/// Jordan-Wigner terms of the single-excitation cluster operator
/// t (a_a^dag a_i - a_i^dag a_a). Coefficients are real; all words commute.
inline PauliTermList single_excitation_terms(std::size_t i, std::size_t a, std::size_t n, double t) {
    PauliOp op = jordan_wigner(a, n, true) * jordan_wigner(i, n, false);
    op -= jordan_wigner(i, n, true) * jordan_wigner(a, n, false);
    return anti_hermitian_terms(op * cxd{t, 0.0});
}

/// Jordan-Wigner terms of the double-excitation cluster operator
/// t (a_a^dag a_b^dag a_j a_i - h.c.).
inline PauliTermList double_excitation_terms(std::size_t i, std::size_t j, std::size_t a,
                                             std::size_t b, std::size_t n, double t) {
    PauliOp fwd = jordan_wigner(a, n, true) * jordan_wigner(b, n, true) * jordan_wigner(j, n, false) *
                  jordan_wigner(i, n, false);
    PauliOp op = fwd;
    op -= fwd.adjoint();
    return anti_hermitian_terms(op * cxd{t, 0.0});
}

/// Appends exp(-i g P) for one Pauli word: per-qubit basis changes, a cx
/// parity ladder onto the last active qubit, rz(2g), and the mirror.
inline void append_pauli_exponential(Circuit& c, const std::string& word, double g) {
    std::vector<std::uint32_t> active;
    for (std::size_t q = 0; q < word.size(); ++q)
        if (word[q] != 'I') active.push_back(static_cast<std::uint32_t>(q));
    if (active.empty()) return; // pure phase
    auto basis_in = [&](std::uint32_t q) {
        if (word[q] == 'X')
            c.h(q);
        else if (word[q] == 'Y')
            c.rx(kPi / 2, q);
    };
    auto basis_out = [&](std::uint32_t q) {
        if (word[q] == 'X')
            c.h(q);
        else if (word[q] == 'Y')
            c.rx(-kPi / 2, q);
    };
    for (auto q : active) basis_in(q);
    for (std::size_t k = 0; k + 1 < active.size(); ++k) c.cx(active[k], active[k + 1]);
    c.rz(2.0 * g, active.back());
    for (std::size_t k = active.size() - 1; k-- > 0;) c.cx(active[k], active[k + 1]);
    for (auto q : active) basis_out(q);
}

/// Symbolic variant: rz angle is 2 * g_scale * binding[symbol].
inline void append_pauli_exponential_sym(Circuit& c, const std::string& word,
                                         const std::string& symbol, double g_scale) {
    std::vector<std::uint32_t> active;
    for (std::size_t q = 0; q < word.size(); ++q)
        if (word[q] != 'I') active.push_back(static_cast<std::uint32_t>(q));
    if (active.empty()) return;
    for (auto q : active) {
        if (word[q] == 'X')
            c.h(q);
        else if (word[q] == 'Y')
            c.rx(kPi / 2, q);
    }
    for (std::size_t k = 0; k + 1 < active.size(); ++k) c.cx(active[k], active[k + 1]);
    c.rz(Param::sym_scaled(symbol, 2.0 * g_scale), active.back());
    for (std::size_t k = active.size() - 1; k-- > 0;) c.cx(active[k], active[k + 1]);
    for (auto q : active) {
        if (word[q] == 'X')
            c.h(q);
        else if (word[q] == 'Y')
            c.rx(-kPi / 2, q);
    }
}

/// Pauli term file: one `coefficient pauli-word` per line, '#' comments.
inline PauliTermList load_pauli_terms(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pauli term file: " + path);
    PauliTermList out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double coeff;
        std::string word;
        if (!(ls >> coeff)) continue; // blank / comment-only line
        if (!(ls >> word)) throw IoError("missing pauli word at line " + std::to_string(lineno));
        for (char& ch : word) {
            ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            if (ch != 'I' && ch != 'X' && ch != 'Y' && ch != 'Z')
                throw IoError("invalid pauli word at line " + std::to_string(lineno));
        }
        out.push_back({coeff, word});
    }
    return out;
}

inline void save_pauli_terms(const std::string& path, const PauliTermList& terms,
                             const std::string& header_comment = "") {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write pauli term file: " + path);
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    for (const auto& t : terms) out << detail::fmt_double(t.coefficient) << ' ' << t.word << "\n";
}

} // namespace qbench
