#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ulc/distribution.hpp"
#include "ulc/eval.hpp"
#include "ulc/semantics.hpp"
#include "ulc/types.hpp"

// lambda_Q: a first-order quantum lambda calculus with classical control,
// its statevector machine, and the translation into the core calculus.
//
// Surface syntax:
//   x   ()   *   tt   ff   (e1, e2)   fst e   snd e   (also pi1, pi2)
//   lam x[:T]. e         e1 e2              if e then e1 else e2
//   lamq x[:T]. e        e1 @ e2            e1 (x) e2   (or e1 ⊗ e2)
//   let x (x) y = e1 in e2                  new(e)      G(e) for a gate G
//   ctl(e)   ctl1(e)
// Precedence, loosest first: binders, tensor, @, application. Tensor and
// @ associate to the left. The token sequence `(x)` is always the tensor
// operator, so a parenthesised variable named x must be written without
// parentheses.
//
// Types: U  bit  qbit  A -> B  A -o B (or ⊸)  A * B  A (x) B.

namespace ulc {

// ---------------------------------------------------------------- types

enum class QTypeKind : std::uint8_t { Unit, Bit, Arrow, Prod, Lolli, Qbit, Tensor, Meta };

struct QType;
using QTypePtr = std::shared_ptr<const QType>;

struct QType {
    QTypeKind kind;
    QTypePtr l;
    QTypePtr r;
    std::size_t meta = 0;  // Meta only
};

QTypePtr q_unit();
QTypePtr q_bit();
QTypePtr q_qbit();
QTypePtr q_arrow(QTypePtr a, QTypePtr b);
QTypePtr q_prod(QTypePtr a, QTypePtr b);
QTypePtr q_lolli(QTypePtr a, QTypePtr b);
QTypePtr q_tensor(QTypePtr a, QTypePtr b);

// qbit, and tensors of quantum types.
bool is_quantum_type(const QTypePtr &a);
// U, bit, and ->, *, -o over classical/quantum types as the grammar allows.
bool is_classical_type(const QTypePtr &a);
bool q_type_equal(const QTypePtr &a, const QTypePtr &b);
std::string to_string(const QTypePtr &a);
QTypePtr parse_qtype(std::string_view src);

// ---------------------------------------------------------------- terms

enum class QKind : std::uint8_t {
    Var,
    Star,
    Lam,
    App,
    Pair,
    Fst,
    Snd,
    True,
    False,
    If,
    Tensor,
    LetTensor,
    New,
    Gate,
    LamQ,
    AppQ,
    Ctl,   // control fires when the control qubit is |0> (tt)
    Ctl1,  // control fires when the control qubit is |1> (ff)
};

struct QTerm;
using QTermPtr = std::shared_ptr<const QTerm>;

struct QTerm {
    QKind kind;
    std::string name;   // Var, binder, gate name, first let binder
    std::string name2;  // second let binder
    QTypePtr annot;     // optional binder annotation
    QTermPtr a, b, c;   // operands; If uses all three
};

QTermPtr q_var(const std::string &x);
QTermPtr q_star();
QTermPtr q_true();
QTermPtr q_false();
QTermPtr q_lam(const std::string &x, QTermPtr body, QTypePtr annot = nullptr);
QTermPtr q_lamq(const std::string &x, QTermPtr body, QTypePtr annot = nullptr);
QTermPtr q_app(QTermPtr f, QTermPtr a);
QTermPtr q_appq(QTermPtr f, QTermPtr a);
QTermPtr q_pair(QTermPtr a, QTermPtr b);
QTermPtr q_fst(QTermPtr t);
QTermPtr q_snd(QTermPtr t);
QTermPtr q_if(QTermPtr c, QTermPtr t, QTermPtr e);
QTermPtr q_tensor(QTermPtr a, QTermPtr b);
QTermPtr q_let_tensor(const std::string &x, const std::string &y, QTermPtr s, QTermPtr body);
QTermPtr q_new(QTermPtr t);
QTermPtr q_gate(const std::string &gate, QTermPtr t);
QTermPtr q_ctl(QTermPtr t, bool on_one = false);

bool is_qvalue(const QTermPtr &t);
std::set<std::string> q_free_vars(const QTermPtr &t);
// Alpha-equivalence; annotations are ignored.
bool q_alpha_equal(const QTermPtr &a, const QTermPtr &b);
// Capture-avoiding t[x := u].
QTermPtr q_substitute(const QTermPtr &t, const std::string &x, const QTermPtr &u);
std::size_t q_size(const QTermPtr &t);

class GateTable;
// Identifiers followed by `(` that name a gate in `gates` parse as gate
// applications. Without a table the built-in gates are used.
QTermPtr parse_qterm(std::string_view src, const GateTable *gates = nullptr);
std::string to_string(const QTermPtr &t);

// ---------------------------------------------------------------- gates

using Gate = std::array<std::array<Scalar, 2>, 2>;  // Gate[row][col]

// diag(1, e^{i theta})
Gate phase_gate(double theta);

constexpr double kUnitaryTolerance = 1e-7;

bool is_unitary(const Gate &g, double tol = kUnitaryTolerance);

class GateTable {
  public:
    GateTable() = default;
    // H X Y Z S T I.
    static GateTable standard();

    // DomainError unless g is unitary (when checked) and finite.
    void add(const std::string &name, const Gate &g, bool check_unitary = true);
    bool contains(const std::string &name) const { return gates_.count(name) != 0; }
    const Gate &at(const std::string &name) const;  // DomainError if absent
    std::vector<std::string> names() const;

  private:
    std::map<std::string, Gate> gates_;
};

// {"NAME": [[a, b], [c, d]], ...}; entries are numbers or {"re":..,"im":..}.
// Gates are added on top of `base`.
GateTable parse_gate_table(std::string_view json, GateTable base = GateTable::standard(),
                           bool check_unitary = true);

// ---------------------------------------------------------------- typing

using QContext = std::vector<std::pair<std::string, QTypePtr>>;

// Delta |-_C t : A. Throws QTypeError.
QTypePtr lq_type_classical(const QContext &delta, const QTermPtr &t, const GateTable &gates = GateTable::standard());
// Delta | Gamma |-_Q t : A. Every variable of Gamma is used exactly once.
QTypePtr lq_type_quantum(const QContext &delta, const QContext &gamma, const QTermPtr &t,
                         const GateTable &gates = GateTable::standard());

enum class Judgment : std::uint8_t { Classical, Quantum };

struct QTyping {
    Judgment judgment;
    QTypePtr type;
};

// Quantum judgment when gamma is non-empty. With an empty gamma the
// classical judgment is tried first, then the quantum one.
QTyping lq_typecheck(const QContext &delta, const QContext &gamma, const QTermPtr &t,
                     const GateTable &gates = GateTable::standard());

// ---------------------------------------------------------------- machine

// Wire 1 is the most significant bit of the amplitude index.
struct QuantumState {
    std::vector<Scalar> amplitudes{Scalar{1.0, 0.0}};
    std::size_t qubits() const;
};

// Appends wire n+1 in |0> (bit false) or |1> (bit true).
void add_qubit(QuantumState &q, bool bit);
// Applies g to `wire` (1-based) on the amplitudes whose control wires
// hold the given bits.
void apply_gate(QuantumState &q, std::size_t wire, const Gate &g,
                const std::vector<std::pair<std::size_t, bool>> &controls = {});

// Nonzero amplitudes as kets, e.g. "0.70710678|00> + 0.70710678|11>".
std::string to_string(const QuantumState &q);

struct Program {
    QuantumState state;
    std::map<std::string, std::size_t> wires;  // variable -> wire
    QTermPtr term;
};

// DomainError unless the wires map FV(term) bijectively onto 1..n, with
// n the number of qubits, and the state has unit norm.
void validate_program(const Program &p);

// The program's type: {} | FV(t):qbit |-_Q t : A, or for closed terms
// the classical judgment.
QTyping lq_program_type(const Program &p, const GateTable &gates = GateTable::standard());

// One reduction step, or nullopt when the term is a value. StuckError when
// a non-value cannot reduce.
std::optional<Program> lq_step(const Program &p, const GateTable &gates = GateTable::standard());

struct LqRun {
    Program program;
    std::size_t steps = 0;
    bool finished = false;  // false: fuel ran out
};

LqRun lq_run(const Program &p, const GateTable &gates = GateTable::standard(), std::size_t fuel = kDefaultFuel,
             const std::function<void(const Program &)> &trace = {});

// {"amplitudes": [...], "wires": {"x": 1, ...}, "term": "..."}. The
// amplitudes default to [1] (no qubits). Validated with validate_program.
Program parse_program(std::string_view json, const GateTable &gates = GateTable::standard());
std::string program_to_json(const Program &p, int indent = 2);

// ---------------------------------------------------------------- translation

// U -> U; bit -> B; qbit -> #B; A -> B and A * B componentwise;
// A (x) B -> [[A]] (x) [[B]]; A -o B -> U -> ([[A]] => [[B]]).
TypePtr translate_type(const QTypePtr &a);
// lam x. match x { inl x1 -> a.inl x1 + c.inr x1 | inr x2 -> b.inl x2 + d.inr x2 }
TermPtr gate_term(const Gate &g);
TermPtr translate_term(const QTermPtr &t, const GateTable &gates = GateTable::standard());
// sum_i alpha_i . [[t]][wires := bits of i], skipping zero amplitudes.
Canonical translate_program(const Program &p, const GateTable &gates = GateTable::standard());

struct AdequacyStep {
    std::size_t index = 0;  // step k compares programs k and k+1
    std::string before;     // normal forms of the translations
    std::string after;
};

struct AdequacyReport {
    std::vector<AdequacyStep> steps;
    bool finished = false;  // the lambda_Q run reached a value
    Tri typeable = Tri::Unsupported;
    std::string typing_message;
};

struct AdequacyOptions {
    std::size_t lq_fuel = kDefaultFuel;
    std::size_t eval_fuel = kDefaultFuel;
    // Gates used for the translation; defaults to the machine's table.
    // A different table gives a negative control.
    std::optional<GateTable> translation_gates;
    double tolerance = 1e-9;
};

// Runs p and checks that every step preserves the normal form of the
// translation, ignoring zero-coefficient summands. Throws
// AdequacyViolation at the first mismatch.
AdequacyReport adequacy_check(const Program &p, const GateTable &gates = GateTable::standard(),
                              const AdequacyOptions &options = {});

}  // namespace ulc
