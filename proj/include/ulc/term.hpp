#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ulc/scalar.hpp"

// Pure terms and raw term distributions.
//
// Terms are locally nameless: bound occurrences are de Bruijn indices
// (BVar), free occurrences are names (FVar). Binders keep a name hint for
// printing only, so alpha-equivalent terms are structurally identical.
// Bodies of binders (abstraction body, sequence tail, let body, match
// branches) are raw distributions and are never rearranged.
//
// Index convention: a binder of arity n adds n levels. For
// `let (x, y) = t in s`, index 1 refers to x and index 0 to y.

namespace ulc {

enum class Kind : std::uint8_t { BVar, FVar, Lam, Void, Pair, Inl, Inr, App, Seq, LetPair, Match };

enum class DistKind : std::uint8_t { Zero, Single, Sum, Scale };

struct Term;
struct Dist;
using TermPtr = std::shared_ptr<const Term>;
using DistPtr = std::shared_ptr<const Dist>;

struct Term {
    Kind kind;
    std::size_t index = 0;  // BVar
    std::string name;       // FVar name, or first binder hint
    std::string name2;      // second binder hint (LetPair y, Match right)
    TermPtr a;              // Pair/App left, Inl/Inr payload, scrutinee
    TermPtr b;              // Pair/App right
    DistPtr d1;             // Lam body, Seq tail, LetPair body, Match left
    DistPtr d2;             // Match right
};

struct Dist {
    DistKind kind;
    Scalar coef{1.0, 0.0};  // Scale
    TermPtr term;           // Single
    DistPtr a;              // Sum left, Scale operand
    DistPtr b;              // Sum right
};

// Term constructors. The named binder constructors abstract the given
// free variable(s) in the body.
TermPtr var(const std::string &name);
TermPtr bvar(std::size_t index);
TermPtr lam(const std::string &x, DistPtr body);
TermPtr lam_raw(const std::string &hint, DistPtr body);
TermPtr void_term();
TermPtr pair(TermPtr v, TermPtr w);  // ShapeError unless both are values
TermPtr inl(TermPtr v);
TermPtr inr(TermPtr v);
TermPtr tt();
TermPtr ff();
TermPtr app(TermPtr s, TermPtr t);
TermPtr seq(TermPtr t, DistPtr s);
TermPtr let_pair(const std::string &x, const std::string &y, TermPtr t, DistPtr body);
TermPtr let_pair_raw(const std::string &hx, const std::string &hy, TermPtr t, DistPtr body);
TermPtr match(TermPtr t, const std::string &x1, DistPtr s1, const std::string &x2, DistPtr s2);
TermPtr match_raw(TermPtr t, const std::string &h1, DistPtr s1, const std::string &h2, DistPtr s2);
// if t then s1 else s2 := match t {inl x1 -> x1; s1 | inr x2 -> x2; s2}
TermPtr if_then_else(TermPtr t, DistPtr s1, DistPtr s2);
// Pairing of arbitrary pure terms. Pairs of values are plain pairs;
// otherwise the components are evaluated through beta-redexes first
// (second component first), e.g. (lam b. (lam a. (a, b)) s) t.
// Inputs must be locally closed.
TermPtr pair_term(TermPtr s, TermPtr t);

DistPtr zero();
DistPtr single(TermPtr t);
DistPtr sum(DistPtr a, DistPtr b);
DistPtr scale(Scalar c, DistPtr d);
DistPtr scale(Scalar c, TermPtr t);
// Left-nested sum of all items; zero() when empty.
DistPtr sum_all(const std::vector<DistPtr> &items);

bool is_value(const Term &t);
bool is_value(const TermPtr &t);
bool is_tt(const TermPtr &t);
bool is_ff(const TermPtr &t);

// Total structural order ignoring binder hints; scalars inside bodies are
// compared with the epsilon tolerance.
int compare(const TermPtr &a, const TermPtr &b);
int compare(const DistPtr &a, const DistPtr &b);
bool alpha_equal(const TermPtr &a, const TermPtr &b);
bool alpha_equal(const DistPtr &a, const DistPtr &b);

struct TermLess {
    bool operator()(const TermPtr &a, const TermPtr &b) const { return compare(a, b) < 0; }
};

std::set<std::string> free_vars(const TermPtr &t);
std::set<std::string> free_vars(const DistPtr &d);
bool occurs_free(const std::string &x, const TermPtr &t);
bool occurs_free(const std::string &x, const DistPtr &d);
bool is_closed(const TermPtr &t);
bool is_closed(const DistPtr &d);

// Replace FVar names[j] by a de Bruijn index (the body of a binder of
// arity names.size()).
DistPtr abstract(const DistPtr &d, const std::vector<std::string> &names);
// Inverse of abstract: replace the outermost bound indices by values.
DistPtr instantiate(const DistPtr &d, const std::vector<TermPtr> &values);

// Pure substitution t[x := w]. w must be a pure value (possibly open).
// Capture cannot happen because bound variables are nameless.
TermPtr substitute(const TermPtr &t, const std::string &x, const TermPtr &w);
DistPtr substitute(const DistPtr &d, const std::string &x, const TermPtr &w);
DistPtr pure_substitute(const DistPtr &d, const std::string &x, const TermPtr &w);

// Church numeral lam f. lam x. f (f ... (f x)).
TermPtr church(unsigned n);

// A name not in `avoid`, derived from `base`.
std::string fresh_name(const std::string &base, const std::set<std::string> &avoid);

std::size_t term_size(const TermPtr &t);
std::size_t term_size(const DistPtr &d);

}  // namespace ulc
