#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ulc/eval.hpp"
#include "ulc/semantics.hpp"
#include "ulc/syntax.hpp"
#include "ulc/types.hpp"

// Typing derivations, orthogonality judgments and a semantic oracle for
// judgments over finite data contexts.
//
// Binder rules (PureLam, UnitLam, LetPair, LetTens, PureMatch) append the
// bound variables at the end of the premise context, in binder order.
// Elsewhere contexts are compared as sets.

namespace ulc {

using TypingJudgment = JudgmentText;
using OrthogonalityJudgment = OrthogonalityText;

enum class Rule : std::uint8_t {
    Axiom,
    Sub,
    PureLam,
    UnitLam,
    App,
    Void,
    Seq,
    SeqSharp,
    Pair,
    LetPair,
    LetTens,
    InL,
    InR,
    PureMatch,
    Weak,
    Contr,
    UnitaryMatch,
    Realize,  // closed distribution checked directly against its type
};

const char *to_string(Rule r);

struct Derivation {
    Rule rule;
    TypingJudgment conclusion;
    std::vector<Derivation> premises;
    std::optional<OrthogonalityJudgment> orthogonality;  // UnitaryMatch only
};

std::string to_string(const TypingJudgment &j);
std::string to_string(const OrthogonalityJudgment &j);
// Indented tree, one judgment per line.
std::string to_string(const Derivation &d);

// Variables whose type is not pure.
std::set<std::string> strict_domain(const Context &ctx);

struct CheckResult {
    bool ok = true;
    std::string diagnostic;  // path to the first bad node and the reason
    explicit operator bool() const { return ok; }
};

CheckResult check_derivation(const Derivation &d, std::size_t fuel = kDefaultFuel);

// Goal-directed derivation search. Throws NoDerivation with the deepest
// failing subgoal.
Derivation infer(const Context &ctx, const DistPtr &t, const TypePtr &goal, std::size_t fuel = kDefaultFuel);
std::optional<Derivation> try_infer(const Context &ctx, const DistPtr &t, const TypePtr &goal,
                                    std::size_t fuel = kDefaultFuel, std::string *failure = nullptr);

struct SemanticReport {
    Tri verdict = Tri::Unsupported;
    std::string message;
};

SemanticReport check_orthogonality(const OrthogonalityJudgment &j, std::size_t fuel = kDefaultFuel);

// Probes every basis substitution of the context, plus phase and pairwise
// superposition probes for sharp variables.
SemanticReport validate_semantically(const TypingJudgment &j, std::size_t fuel = kDefaultFuel);

}  // namespace ulc
