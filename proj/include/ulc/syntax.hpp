#pragma once

#include <map>
#include <string>
#include <string_view>

#include "ulc/distribution.hpp"
#include "ulc/types.hpp"

// Surface syntax for terms, types and judgments.
//
//   lam x. e      e1 e2      ()      (e1, e2)      inl e      inr e
//   tt   ff       e1 ; e2    let (x, y) = e1 in e2
//   match e { inl x1 -> e1 | inr x2 -> e2 }       if e then e1 else e2
//   e1 + e2       e1 - e2    c * e (or c·e)        0 (the zero vector)
//   church n      |+>  |->
//
// Scalars: decimals, `i`, `sqrt(...)`, + - * / and parentheses.
// Types: U B !A #A flat A sharp A  A + B  A * B  A (+) B  A (x) B
//        A -> B  A => B.

namespace ulc {

// Names resolved before falling back to free variables. Entries must be
// closed.
using Environment = std::map<std::string, DistPtr>;

DistPtr parse_dist(std::string_view src, const Environment *env = nullptr);
// The input must denote a single pure term (no sums or scalars at top).
TermPtr parse_term(std::string_view src, const Environment *env = nullptr);
TypePtr parse_type(std::string_view src);
Context parse_context(std::string_view src);

struct JudgmentText {
    Context context;
    DistPtr term;
    TypePtr type;
};

// "x:#B, y:B |- e : #B"
JudgmentText parse_judgment(std::string_view src, const Environment *env = nullptr);

struct OrthogonalityText {
    Context shared;
    Context left_context;
    DistPtr left;
    Context right_context;
    DistPtr right;
    TypePtr type;
};

// "G |- <D1 | e1 _|_ D2 | e2> : A" (the D parts may be omitted).
OrthogonalityText parse_orthogonality(std::string_view src, const Environment *env = nullptr);

// Printing. Terms print with `digits` significant digits in scalars; the
// default is enough to round-trip doubles.
std::string to_string(const TermPtr &t, int digits = 17);
std::string to_string(const DistPtr &d, int digits = 17);
std::string to_string(const Canonical &c, int digits = 8);

}  // namespace ulc
