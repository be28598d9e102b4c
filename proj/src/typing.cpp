#include "ulc/typing.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <utility>

#include "ulc/errors.hpp"

namespace ulc {

namespace {

// ---------------------------------------------------------------------------
// Context helpers

const Binding *lookup(const Context &ctx, const std::string &x) {
    for (const auto &b : ctx) {
        if (b.name == x) {
            return &b;
        }
    }
    return nullptr;
}

std::set<std::string> names_of(const Context &ctx) {
    std::set<std::string> out;
    for (const auto &b : ctx) {
        out.insert(b.name);
    }
    return out;
}

bool has_duplicates(const Context &ctx) { return names_of(ctx).size() != ctx.size(); }

// Same bindings, ignoring order.
bool same_context(const Context &a, const Context &b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (const auto &x : a) {
        const Binding *y = lookup(b, x.name);
        if (y == nullptr || !type_equal(x.type, y->type)) {
            return false;
        }
    }
    return true;
}

Context minus(const Context &a, const Context &b) {
    Context out;
    for (const auto &x : a) {
        if (lookup(b, x.name) == nullptr) {
            out.push_back(x);
        }
    }
    return out;
}

Context concat(Context a, const Context &b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// a = b1, b2 with dom(b1) and dom(b2) disjoint.
bool is_disjoint_union(const Context &a, const Context &b1, const Context &b2) {
    for (const auto &x : b1) {
        if (lookup(b2, x.name) != nullptr) {
            return false;
        }
    }
    return same_context(a, concat(b1, b2));
}

bool is_pure_binding(const TypePtr &a) { return type_equiv(flat(a), a); }

std::set<std::string> fv(const DistPtr &d) { return free_vars(d); }
std::set<std::string> fv(const TermPtr &t) { return free_vars(t); }

std::set<std::string> unite(std::set<std::string> a, const std::set<std::string> &b) {
    a.insert(b.begin(), b.end());
    return a;
}

// ---------------------------------------------------------------------------
// Probe values for the semantic checks

// Groups of basis values such that every unit combination inside a group
// (or tensor of groups, for products) belongs to the type.
std::vector<std::vector<TermPtr>> blocks_of(const TypePtr &a) {
    switch (a->kind) {
    case TypeKind::Unit:
        return {{void_term()}};
    case TypeKind::Sum: {
        std::vector<std::vector<TermPtr>> out;
        for (const auto &blk : blocks_of(a->l)) {
            std::vector<TermPtr> m;
            for (const auto &b : blk) {
                m.push_back(inl(b));
            }
            out.push_back(std::move(m));
        }
        for (const auto &blk : blocks_of(a->r)) {
            std::vector<TermPtr> m;
            for (const auto &b : blk) {
                m.push_back(inr(b));
            }
            out.push_back(std::move(m));
        }
        return out;
    }
    case TypeKind::Prod: {
        std::vector<std::vector<TermPtr>> out;
        for (const auto &bl : blocks_of(a->l)) {
            for (const auto &br : blocks_of(a->r)) {
                std::vector<TermPtr> m;
                for (const auto &x : bl) {
                    for (const auto &y : br) {
                        m.push_back(pair(x, y));
                    }
                }
                out.push_back(std::move(m));
            }
        }
        return out;
    }
    case TypeKind::Sharp:
        return {basis_of_type(a->l)};
    default:
        throw UnsupportedType("context type " + to_string(a) + " is outside the finite data fragment");
    }
}

Canonical unit_vector(const TermPtr &t) { return Canonical::of(t); }

std::vector<Canonical> probes_of(const TypePtr &a) {
    switch (a->kind) {
    case TypeKind::Unit:
        return {unit_vector(void_term())};
    case TypeKind::Sum: {
        std::vector<Canonical> out;
        for (const auto &p : probes_of(a->l)) {
            out.push_back(lift_constructor(Ctor::Inl, {p}));
        }
        for (const auto &p : probes_of(a->r)) {
            out.push_back(lift_constructor(Ctor::Inr, {p}));
        }
        return out;
    }
    case TypeKind::Prod: {
        std::vector<Canonical> out;
        auto left = probes_of(a->l);
        auto right = probes_of(a->r);
        for (const auto &p : left) {
            for (const auto &q : right) {
                out.push_back(lift_constructor(Ctor::Pair, {p, q}));
            }
        }
        return out;
    }
    case TypeKind::Sharp: {
        const auto basis = basis_of_type(a->l);
        const Scalar s = 1.0 / std::sqrt(2.0);
        const Scalar i{0.0, 1.0};
        std::vector<Canonical> out;
        for (const auto &b : basis) {
            out.push_back(unit_vector(b));
        }
        out.push_back(canonicalize_summands({{i, basis.front()}}));
        for (std::size_t j = 0; j < basis.size(); ++j) {
            for (std::size_t k = j + 1; k < basis.size(); ++k) {
                out.push_back(canonicalize_summands({{s, basis[j]}, {s, basis[k]}}));
                out.push_back(canonicalize_summands({{s, basis[j]}, {s * i, basis[k]}}));
            }
        }
        return out;
    }
    default:
        throw UnsupportedType("context type " + to_string(a) + " is outside the finite data fragment");
    }
}

constexpr std::size_t kMaxProbes = 200000;

// Calls f with one index per dimension, for every combination. Stops early
// when f returns false.
bool for_each_combination(const std::vector<std::size_t> &sizes,
                          const std::function<bool(const std::vector<std::size_t> &)> &f) {
    std::vector<std::size_t> idx(sizes.size(), 0);
    for (auto n : sizes) {
        if (n == 0) {
            return true;
        }
    }
    while (true) {
        if (!f(idx)) {
            return false;
        }
        std::size_t k = 0;
        while (k < idx.size()) {
            if (++idx[k] < sizes[k]) {
                break;
            }
            idx[k] = 0;
            ++k;
        }
        if (k == idx.size()) {
            return true;
        }
    }
}

std::size_t product_size(const std::vector<std::size_t> &sizes) {
    std::size_t total = 1;
    for (auto n : sizes) {
        if (n != 0 && total > kMaxProbes / n) {
            return kMaxProbes + 1;
        }
        total *= n;
    }
    return total;
}

std::string describe(const std::vector<std::pair<std::string, Canonical>> &sigma) {
    std::string out = "{";
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        out += (k > 0 ? ", " : "") + sigma[k].first + " := " + to_string(sigma[k].second);
    }
    return out + "}";
}

Canonical substitute_all(Canonical t, const std::vector<std::pair<std::string, Canonical>> &sigma) {
    for (const auto &[x, v] : sigma) {
        t = bilinear_substitute(t, x, v);
    }
    return t;
}

std::optional<std::string> domain_condition(const TypingJudgment &j) {
    if (has_duplicates(j.context)) {
        return "context has a repeated variable";
    }
    const auto free = fv(j.term);
    for (const auto &x : free) {
        if (lookup(j.context, x) == nullptr) {
            return "free variable " + x + " is not in the context";
        }
    }
    for (const auto &x : strict_domain(j.context)) {
        if (free.count(x) == 0) {
            return "variable " + x + " has a non-pure type but does not occur free";
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Derivation checking

class Checker {
  public:
    explicit Checker(std::size_t fuel) : fuel_(fuel) {}

    std::optional<std::string> node(const Derivation &d) {
        const std::string here = to_string(d.rule);
        if (auto bad = domain_condition(d.conclusion)) {
            return here + ": " + to_string(d.conclusion) + ": " + *bad;
        }
        for (std::size_t k = 0; k < d.premises.size(); ++k) {
            if (auto bad = node(d.premises[k])) {
                return here + " > premise " + std::to_string(k + 1) + " > " + *bad;
            }
        }
        if (auto bad = schema(d)) {
            return here + ": " + to_string(d.conclusion) + ": " + *bad;
        }
        return std::nullopt;
    }

  private:
    std::size_t fuel_;

    static std::optional<std::string> arity(const Derivation &d, std::size_t n) {
        if (d.premises.size() != n) {
            return "expected " + std::to_string(n) + " premise(s), found " + std::to_string(d.premises.size());
        }
        if (d.orthogonality && d.rule != Rule::UnitaryMatch) {
            return "unexpected orthogonality premise";
        }
        return std::nullopt;
    }

    // The single term of a conclusion, if it is one.
    static TermPtr term_of(const TypingJudgment &j) {
        return j.term->kind == DistKind::Single ? j.term->term : nullptr;
    }

    // Last `n` bindings of a premise context are the binders; the rest
    // must be `outer`.
    static std::optional<std::string> binders(const Context &premise, const Context &outer, std::size_t n,
                                              Context &bound) {
        if (premise.size() < n) {
            return "premise context lacks the bound variable(s)";
        }
        bound.assign(premise.end() - static_cast<std::ptrdiff_t>(n), premise.end());
        Context rest(premise.begin(), premise.end() - static_cast<std::ptrdiff_t>(n));
        for (const auto &b : bound) {
            if (lookup(rest, b.name) != nullptr) {
                return "bound variable " + b.name + " clashes with the context";
            }
        }
        if (!same_context(rest, outer)) {
            return "premise context does not extend the expected context";
        }
        return std::nullopt;
    }

    std::optional<std::string> schema(const Derivation &d) {
        const auto &c = d.conclusion;
        const TermPtr t = term_of(c);
        auto need_term = [&](Kind k) -> std::optional<std::string> {
            if (!t || t->kind != k) {
                return std::string("conclusion term has the wrong shape for this rule");
            }
            return std::nullopt;
        };
        switch (d.rule) {
        case Rule::Axiom: {
            if (auto bad = arity(d, 0)) {
                return bad;
            }
            if (!t || t->kind != Kind::FVar || c.context.size() != 1 || c.context[0].name != t->name) {
                return "expected x:A |- x";
            }
            if (!type_equal(c.context[0].type, c.type)) {
                return "type differs from the context entry";
            }
            return std::nullopt;
        }
        case Rule::Sub: {
            if (auto bad = arity(d, 1)) {
                return bad;
            }
            const auto &p = d.premises[0].conclusion;
            if (!same_context(p.context, c.context) || !alpha_equal(p.term, c.term)) {
                return "premise must have the same context and term";
            }
            if (!subtype(p.type, c.type)) {
                return to_string(p.type) + " is not a subtype of " + to_string(c.type);
            }
            return std::nullopt;
        }
        case Rule::PureLam:
        case Rule::UnitLam: {
            if (auto bad = arity(d, 1)) {
                return bad;
            }
            if (auto bad = need_term(Kind::Lam)) {
                return bad;
            }
            const TypeKind want = d.rule == Rule::PureLam ? TypeKind::Arrow : TypeKind::UArrow;
            if (c.type->kind != want) {
                return std::string("conclusion type must be ") + (want == TypeKind::Arrow ? "A -> B" : "A => B");
            }
            const auto &p = d.premises[0].conclusion;
            Context bound;
            if (auto bad = binders(p.context, c.context, 1, bound)) {
                return bad;
            }
            if (!type_equal(bound[0].type, c.type->l) || !type_equal(p.type, c.type->r)) {
                return "premise does not match the arrow type";
            }
            if (!alpha_equal(single(lam(bound[0].name, p.term)), c.term)) {
                return "premise term is not the abstraction body";
            }
            if (d.rule == Rule::PureLam) {
                for (const auto &b : c.context) {
                    if (!is_pure_binding(b.type)) {
                        return "context entry " + b.name + ":" + to_string(b.type) + " is not pure";
                    }
                }
            }
            return std::nullopt;
        }
        case Rule::App: {
            if (auto bad = arity(d, 2)) {
                return bad;
            }
            if (auto bad = need_term(Kind::App)) {
                return bad;
            }
            const auto &f = d.premises[0].conclusion;
            const auto &a = d.premises[1].conclusion;
            if (f.type->kind != TypeKind::UArrow) {
                return "function premise must have a type A => B";
            }
            if (!type_equal(f.type->l, a.type) || !type_equal(f.type->r, c.type)) {
                return "argument or result type does not match A => B";
            }
            if (!alpha_equal(f.term, single(t->a)) || !alpha_equal(a.term, single(t->b))) {
                return "premise terms are not the function and argument";
            }
            if (!is_disjoint_union(c.context, f.context, a.context)) {
                return "context is not the disjoint union of the premise contexts";
            }
            return std::nullopt;
        }
        case Rule::Void: {
            if (auto bad = arity(d, 0)) {
                return bad;
            }
            if (!c.context.empty() || !t || t->kind != Kind::Void || c.type->kind != TypeKind::Unit) {
                return "expected |- () : U";
            }
            return std::nullopt;
        }
        case Rule::Seq:
        case Rule::SeqSharp: {
            if (auto bad = arity(d, 2)) {
                return bad;
            }
            if (auto bad = need_term(Kind::Seq)) {
                return bad;
            }
            const auto &p1 = d.premises[0].conclusion;
            const auto &p2 = d.premises[1].conclusion;
            const TypePtr unit = d.rule == Rule::Seq ? unit_type() : sharp(unit_type());
            if (!type_equal(p1.type, unit)) {
                return "first premise must have type " + to_string(unit);
            }
            if (!type_equal(p2.type, c.type)) {
                return "second premise type differs from the conclusion";
            }
            if (d.rule == Rule::SeqSharp && c.type->kind != TypeKind::Sharp) {
                return "conclusion type must be #A";
            }
            if (!alpha_equal(p1.term, single(t->a)) || !alpha_equal(p2.term, t->d1)) {
                return "premise terms do not match the sequence";
            }
            if (!is_disjoint_union(c.context, p1.context, p2.context)) {
                return "context is not the disjoint union of the premise contexts";
            }
            return std::nullopt;
        }
        case Rule::Pair: {
            if (auto bad = arity(d, 2)) {
                return bad;
            }
            if (auto bad = need_term(Kind::Pair)) {
                return bad;
            }
            const auto &p1 = d.premises[0].conclusion;
            const auto &p2 = d.premises[1].conclusion;
            if (c.type->kind != TypeKind::Prod || !type_equal(c.type->l, p1.type) ||
                !type_equal(c.type->r, p2.type)) {
                return "conclusion type must be the product of the premise types";
            }
            if (!alpha_equal(p1.term, single(t->a)) || !alpha_equal(p2.term, single(t->b))) {
                return "premise terms are not the pair components";
            }
            if (!is_disjoint_union(c.context, p1.context, p2.context)) {
                return "context is not the disjoint union of the premise contexts";
            }
            return std::nullopt;
        }
        case Rule::LetPair:
        case Rule::LetTens: {
            if (auto bad = arity(d, 2)) {
                return bad;
            }
            if (auto bad = need_term(Kind::LetPair)) {
                return bad;
            }
            const auto &p1 = d.premises[0].conclusion;
            const auto &p2 = d.premises[1].conclusion;
            TypePtr a;
            TypePtr b;
            if (d.rule == Rule::LetPair) {
                if (p1.type->kind != TypeKind::Prod) {
                    return "scrutinee must have a type A * B";
                }
                a = p1.type->l;
                b = p1.type->r;
            } else {
                if (p1.type->kind != TypeKind::Sharp || p1.type->l->kind != TypeKind::Prod) {
                    return "scrutinee must have a type A (x) B";
                }
                a = sharp(p1.type->l->l);
                b = sharp(p1.type->l->r);
                if (c.type->kind != TypeKind::Sharp) {
                    return "conclusion type must be #C";
                }
            }
            const Context delta = minus(c.context, p1.context);
            Context bound;
            if (auto bad = binders(p2.context, delta, 2, bound)) {
                return bad;
            }
            if (!type_equal(bound[0].type, a) || !type_equal(bound[1].type, b)) {
                return "bound variables must have types " + to_string(a) + " and " + to_string(b);
            }
            if (!type_equal(p2.type, c.type)) {
                return "body type differs from the conclusion";
            }
            if (!alpha_equal(single(let_pair(bound[0].name, bound[1].name, t->a, p2.term)), c.term) ||
                !alpha_equal(p1.term, single(t->a))) {
                return "premise terms do not match the let";
            }
            if (!is_disjoint_union(c.context, p1.context, delta)) {
                return "context is not the disjoint union of the premise contexts";
            }
            return std::nullopt;
        }
        case Rule::InL:
        case Rule::InR: {
            if (auto bad = arity(d, 1)) {
                return bad;
            }
            const Kind k = d.rule == Rule::InL ? Kind::Inl : Kind::Inr;
            if (auto bad = need_term(k)) {
                return bad;
            }
            const auto &p = d.premises[0].conclusion;
            if (c.type->kind != TypeKind::Sum) {
                return "conclusion type must be A + B";
            }
            const TypePtr side = d.rule == Rule::InL ? c.type->l : c.type->r;
            if (!type_equal(side, p.type)) {
                return "premise type does not match the injected side";
            }
            if (!same_context(p.context, c.context) || !alpha_equal(p.term, single(t->a))) {
                return "premise must have the same context and the payload";
            }
            return std::nullopt;
        }
        case Rule::PureMatch: {
            if (auto bad = arity(d, 3)) {
                return bad;
            }
            if (auto bad = need_term(Kind::Match)) {
                return bad;
            }
            const auto &p0 = d.premises[0].conclusion;
            const auto &p1 = d.premises[1].conclusion;
            const auto &p2 = d.premises[2].conclusion;
            if (p0.type->kind != TypeKind::Sum) {
                return "scrutinee must have a type A + B";
            }
            const Context delta = minus(c.context, p0.context);
            Context b1;
            Context b2;
            if (auto bad = binders(p1.context, delta, 1, b1)) {
                return "left branch: " + *bad;
            }
            if (auto bad = binders(p2.context, delta, 1, b2)) {
                return "right branch: " + *bad;
            }
            if (!type_equal(b1[0].type, p0.type->l) || !type_equal(b2[0].type, p0.type->r)) {
                return "branch variables do not match the sum components";
            }
            if (!type_equal(p1.type, c.type) || !type_equal(p2.type, c.type)) {
                return "branch types differ from the conclusion";
            }
            if (!alpha_equal(p0.term, single(t->a)) ||
                !alpha_equal(single(match(t->a, b1[0].name, p1.term, b2[0].name, p2.term)), c.term)) {
                return "premise terms do not match the match";
            }
            if (!is_disjoint_union(c.context, p0.context, delta)) {
                return "context is not the disjoint union of the premise contexts";
            }
            return std::nullopt;
        }
        case Rule::UnitaryMatch: {
            if (auto bad = arity(d, 1)) {
                return bad;
            }
            if (auto bad = need_term(Kind::Match)) {
                return bad;
            }
            if (!d.orthogonality) {
                return "missing orthogonality premise";
            }
            const auto &p0 = d.premises[0].conclusion;
            const auto &o = *d.orthogonality;
            if (p0.type->kind != TypeKind::Sharp || p0.type->l->kind != TypeKind::Sum) {
                return "scrutinee must have a type A1 (+) A2";
            }
            if (c.type->kind != TypeKind::Sharp || !type_equal(o.type, c.type)) {
                return "orthogonality type must be the conclusion type #C";
            }
            const Context delta = minus(c.context, p0.context);
            if (!same_context(o.shared, delta)) {
                return "orthogonality shared context is not the branch context";
            }
            if (o.left_context.size() != 1 || o.right_context.size() != 1) {
                return "orthogonality sides must bind exactly the branch variables";
            }
            const auto &x1 = o.left_context[0];
            const auto &x2 = o.right_context[0];
            if (!type_equal(x1.type, sharp(p0.type->l->l)) || !type_equal(x2.type, sharp(p0.type->l->r))) {
                return "branch variables must have types #A1 and #A2";
            }
            if (lookup(delta, x1.name) != nullptr || lookup(delta, x2.name) != nullptr) {
                return "branch variable clashes with the context";
            }
            if (!alpha_equal(p0.term, single(t->a)) ||
                !alpha_equal(single(match(t->a, x1.name, o.left, x2.name, o.right)), c.term)) {
                return "premise terms do not match the match";
            }
            if (!is_disjoint_union(c.context, p0.context, delta)) {
                return "context is not the disjoint union of the premise contexts";
            }
            const auto rep = check_orthogonality(o, fuel_);
            if (rep.verdict != Tri::Yes) {
                return std::string("orthogonality premise is ") + to_string(rep.verdict) + ": " + rep.message;
            }
            return std::nullopt;
        }
        case Rule::Weak: {
            if (auto bad = arity(d, 1)) {
                return bad;
            }
            const auto &p = d.premises[0].conclusion;
            const Context extra = minus(c.context, p.context);
            if (extra.size() != 1 || !minus(p.context, c.context).empty() ||
                !same_context(p.context, minus(c.context, extra))) {
                return "conclusion context must add exactly one variable";
            }
            if (!is_pure_binding(extra[0].type)) {
                return "weakened variable " + extra[0].name + ":" + to_string(extra[0].type) + " is not pure";
            }
            if (!alpha_equal(p.term, c.term) || !type_equal(p.type, c.type)) {
                return "premise must have the same term and type";
            }
            return std::nullopt;
        }
        case Rule::Contr: {
            if (auto bad = arity(d, 1)) {
                return bad;
            }
            const auto &p = d.premises[0].conclusion;
            const Context extra = minus(p.context, c.context);
            if (extra.size() != 1 || !minus(c.context, p.context).empty() ||
                !same_context(c.context, minus(p.context, extra))) {
                return "premise context must have exactly one extra variable";
            }
            const auto &y = extra[0];
            if (!is_pure_binding(y.type)) {
                return "contracted variable " + y.name + ":" + to_string(y.type) + " is not pure";
            }
            if (!type_equal(p.type, c.type)) {
                return "premise type differs from the conclusion";
            }
            for (const auto &x : c.context) {
                if (type_equal(x.type, y.type) && alpha_equal(substitute(p.term, y.name, var(x.name)), c.term)) {
                    return std::nullopt;
                }
            }
            return "conclusion term is not the premise term with " + y.name + " identified";
        }
        case Rule::Realize: {
            if (auto bad = arity(d, 0)) {
                return bad;
            }
            if (!c.context.empty() || !is_closed(c.term)) {
                return "only closed distributions in the empty context";
            }
            const Tri r = realizes(canonicalize(c.term), c.type, fuel_);
            if (r != Tri::Yes) {
                return std::string("realizability check gave ") + to_string(r);
            }
            return std::nullopt;
        }
        }
        return "unknown rule";
    }
};

// ---------------------------------------------------------------------------
// Derivation search

Derivation leaf(Rule r, Context ctx, DistPtr t, TypePtr a) {
    return Derivation{r, TypingJudgment{std::move(ctx), std::move(t), std::move(a)}, {}, std::nullopt};
}

Derivation node(Rule r, Context ctx, DistPtr t, TypePtr a, std::vector<Derivation> premises) {
    return Derivation{r, TypingJudgment{std::move(ctx), std::move(t), std::move(a)}, std::move(premises),
                      std::nullopt};
}

struct Contraction {
    Binding kept;
    std::string copy;
};

// Context split across sub-parts, routing each variable to the parts in
// which it occurs. Pure variables used by several parts are renamed in
// all but the first one.
struct Split {
    std::vector<Context> parts;
    std::vector<std::vector<std::pair<std::string, std::string>>> renames;
    std::vector<Contraction> contractions;
};

// First-order unification over the pure types, used to guess a type for
// a term before checking it. Other types (sharp, unitary arrows) are
// opaque constants. Unconstrained variables default to U.
class Unifier {
  public:
    std::optional<TypePtr> guess(const Context &ctx, const DistPtr &d) {
        std::map<std::string, std::size_t> env;
        for (const auto &b : ctx) {
            env[b.name] = from_type(b.type);
        }
        auto m = dist(env, d);
        if (!m) {
            return std::nullopt;
        }
        return to_type(*m);
    }

    // Type of the subterm `target` (by identity) when the whole of d is
    // taken at `goal`.
    std::optional<TypePtr> guess_at(const Context &ctx, const DistPtr &d, const TypePtr &goal, const Term *target) {
        target_ = target;
        std::map<std::string, std::size_t> env;
        for (const auto &b : ctx) {
            env[b.name] = from_type(b.type);
        }
        auto m = dist(env, d);
        if (!m || !unify(*m, from_type(goal)) || !target_meta_) {
            return std::nullopt;
        }
        return to_type(*target_meta_);
    }

  private:
    const Term *target_ = nullptr;
    std::optional<std::size_t> target_meta_;

    enum class K : std::uint8_t { Var, Unit, Sum, Prod, Arrow, Opaque };
    struct Node {
        K kind;
        std::size_t a = 0;
        std::size_t b = 0;
        TypePtr opaque;
        std::optional<std::size_t> link;  // Var bound to another node
    };
    std::vector<Node> nodes_;
    std::size_t names_ = 0;

    std::size_t make(K k, std::size_t a = 0, std::size_t b = 0, TypePtr o = nullptr) {
        nodes_.push_back(Node{k, a, b, std::move(o), std::nullopt});
        return nodes_.size() - 1;
    }
    std::size_t fresh_var() { return make(K::Var); }

    std::size_t from_type(const TypePtr &t) {
        const TypePtr n = normal_form(t);
        switch (n->kind) {
        case TypeKind::Unit:
            return make(K::Unit);
        case TypeKind::Sum:
            return make(K::Sum, from_type(n->l), from_type(n->r));
        case TypeKind::Prod:
            return make(K::Prod, from_type(n->l), from_type(n->r));
        case TypeKind::Arrow:
            return make(K::Arrow, from_type(n->l), from_type(n->r));
        default:
            return make(K::Opaque, 0, 0, n);
        }
    }

    TypePtr to_type(std::size_t i) {
        i = find(i);
        const Node n = nodes_[i];
        switch (n.kind) {
        case K::Var:
        case K::Unit:
            return unit_type();
        case K::Sum:
            return sum_type(to_type(n.a), to_type(n.b));
        case K::Prod:
            return prod_type(to_type(n.a), to_type(n.b));
        case K::Arrow:
            return pure_arrow(to_type(n.a), to_type(n.b));
        case K::Opaque:
            return n.opaque;
        }
        return unit_type();
    }

    std::size_t find(std::size_t i) {
        while (nodes_[i].kind == K::Var && nodes_[i].link) {
            i = *nodes_[i].link;
        }
        return i;
    }

    bool occurs(std::size_t v, std::size_t i) {
        i = find(i);
        if (i == v) {
            return true;
        }
        const Node n = nodes_[i];
        if (n.kind == K::Sum || n.kind == K::Prod || n.kind == K::Arrow) {
            return occurs(v, n.a) || occurs(v, n.b);
        }
        return false;
    }

    // Opaque mismatches are tolerated: the guess is only a candidate.
    bool unify(std::size_t x, std::size_t y) {
        x = find(x);
        y = find(y);
        if (x == y) {
            return true;
        }
        if (nodes_[x].kind == K::Var) {
            if (occurs(x, y)) {
                return false;
            }
            nodes_[x].link = y;
            return true;
        }
        if (nodes_[y].kind == K::Var) {
            return unify(y, x);
        }
        if (nodes_[x].kind == K::Opaque || nodes_[y].kind == K::Opaque) {
            return true;
        }
        if (nodes_[x].kind != nodes_[y].kind) {
            return false;
        }
        if (nodes_[x].kind == K::Unit) {
            return true;
        }
        const Node nx = nodes_[x];
        const Node ny = nodes_[y];
        return unify(nx.a, ny.a) && unify(nx.b, ny.b);
    }

    std::string bind(std::map<std::string, std::size_t> &env, std::size_t type) {
        std::string x = "%u" + std::to_string(names_++);
        env[x] = type;
        return x;
    }

    // Components of a product or sum, looking through an opaque sharp.
    std::optional<std::pair<std::size_t, std::size_t>> split(std::size_t m, K k) {
        m = find(m);
        if (nodes_[m].kind == K::Opaque) {
            const TypePtr &o = nodes_[m].opaque;
            const TypeKind want = k == K::Prod ? TypeKind::Prod : TypeKind::Sum;
            if (o->kind == TypeKind::Sharp && o->l->kind == want) {
                return std::pair{from_type(sharp(o->l->l)), from_type(sharp(o->l->r))};
            }
            return std::nullopt;
        }
        const std::size_t a = fresh_var();
        const std::size_t b = fresh_var();
        if (!unify(m, make(k, a, b))) {
            return std::nullopt;
        }
        return std::pair{a, b};
    }

    std::optional<std::size_t> dist(std::map<std::string, std::size_t> &env, const DistPtr &d) {
        switch (d->kind) {
        case DistKind::Zero:
            return fresh_var();
        case DistKind::Single:
            return term(env, d->term);
        case DistKind::Scale:
            return dist(env, d->a);
        case DistKind::Sum: {
            auto a = dist(env, d->a);
            auto b = a ? dist(env, d->b) : std::nullopt;
            if (!b || !unify(*a, *b)) {
                return std::nullopt;
            }
            return a;
        }
        }
        return std::nullopt;
    }

    std::optional<std::size_t> term(std::map<std::string, std::size_t> &env, const TermPtr &t) {
        auto m = term_kind(env, t);
        if (m && t.get() == target_ && !target_meta_) {
            target_meta_ = m;
        }
        return m;
    }

    std::optional<std::size_t> term_kind(std::map<std::string, std::size_t> &env, const TermPtr &t) {
        switch (t->kind) {
        case Kind::BVar:
            return std::nullopt;
        case Kind::FVar: {
            auto it = env.find(t->name);
            if (it == env.end()) {
                return std::nullopt;
            }
            return it->second;
        }
        case Kind::Void:
            return make(K::Unit);
        case Kind::Inl:
        case Kind::Inr: {
            auto p = term(env, t->a);
            if (!p) {
                return std::nullopt;
            }
            const std::size_t other = fresh_var();
            return t->kind == Kind::Inl ? make(K::Sum, *p, other) : make(K::Sum, other, *p);
        }
        case Kind::Pair: {
            auto a = term(env, t->a);
            auto b = a ? term(env, t->b) : std::nullopt;
            if (!b) {
                return std::nullopt;
            }
            return make(K::Prod, *a, *b);
        }
        case Kind::Lam: {
            const std::size_t arg = fresh_var();
            const std::string x = bind(env, arg);
            auto body = dist(env, instantiate(t->d1, {var(x)}));
            if (!body) {
                return std::nullopt;
            }
            return make(K::Arrow, arg, *body);
        }
        case Kind::App: {
            auto f = term(env, t->a);
            auto x = f ? term(env, t->b) : std::nullopt;
            if (!x) {
                return std::nullopt;
            }
            const std::size_t h = find(*f);
            if (nodes_[h].kind == K::Opaque) {
                const TypePtr &o = nodes_[h].opaque;
                if (o->kind != TypeKind::UArrow) {
                    return std::nullopt;
                }
                unify(*x, from_type(o->l));
                return from_type(o->r);
            }
            const std::size_t res = fresh_var();
            if (!unify(h, make(K::Arrow, *x, res))) {
                return std::nullopt;
            }
            return res;
        }
        case Kind::Seq: {
            auto h = term(env, t->a);
            if (!h) {
                return std::nullopt;
            }
            unify(*h, make(K::Unit));
            return dist(env, t->d1);
        }
        case Kind::LetPair: {
            auto s = term(env, t->a);
            auto parts = s ? split(*s, K::Prod) : std::nullopt;
            if (!parts) {
                return std::nullopt;
            }
            const std::string x = bind(env, parts->first);
            const std::string y = bind(env, parts->second);
            return dist(env, instantiate(t->d1, {var(x), var(y)}));
        }
        case Kind::Match: {
            auto s = term(env, t->a);
            auto parts = s ? split(*s, K::Sum) : std::nullopt;
            if (!parts) {
                return std::nullopt;
            }
            const std::string x1 = bind(env, parts->first);
            const std::string x2 = bind(env, parts->second);
            auto l = dist(env, instantiate(t->d1, {var(x1)}));
            auto r = l ? dist(env, instantiate(t->d2, {var(x2)})) : std::nullopt;
            if (!r || !unify(*l, *r)) {
                return std::nullopt;
            }
            return l;
        }
        }
        return std::nullopt;
    }
};

class Inferrer {
  public:
    explicit Inferrer(std::size_t fuel) : fuel_(fuel) {}

    const std::string &failure() const { return failure_; }

    std::optional<Derivation> check(const Context &ctx, const DistPtr &t, const TypePtr &goal, std::size_t depth) {
        // The search revisits the same judgments through different
        // guesses; the answer does not depend on depth.
        std::string key = to_string(ctx) + '\x1f' + to_string(t) + '\x1f' + to_string(goal);
        if (auto it = memo_.find(key); it != memo_.end()) {
            return it->second;
        }
        auto d = check_uncached(ctx, t, goal, depth);
        memo_.emplace(std::move(key), d);
        return d;
    }

    std::optional<Derivation> check_uncached(const Context &ctx, const DistPtr &t, const TypePtr &goal,
                                             std::size_t depth) {
        const auto free = fv(t);
        for (const auto &x : free) {
            if (lookup(ctx, x) == nullptr) {
                return fail(depth, ctx, t, goal, "free variable " + x + " is not in the context");
            }
        }
        Context used;
        Context unused;
        for (const auto &b : ctx) {
            (free.count(b.name) ? used : unused).push_back(b);
        }
        for (const auto &b : unused) {
            if (!is_pure_binding(b.type)) {
                return fail(depth, ctx, t, goal,
                            "variable " + b.name + ":" + to_string(b.type) + " is not pure and is not used");
            }
        }
        auto d = core(used, t, goal, depth);
        if (!d && used.empty() && t->kind == DistKind::Single && is_closed(t)) {
            // Closed terms the rules miss (e.g. a match with superposed
            // branches) may still be checked semantically.
            if (realizes(canonicalize(t), goal, fuel_) == Tri::Yes) {
                d = leaf(Rule::Realize, used, t, goal);
            }
        }
        if (!d) {
            return std::nullopt;
        }
        // Rules build their conclusion context from the split parts; the
        // binder rules need the caller's order, with binders last.
        if (same_context(d->conclusion.context, used)) {
            d->conclusion.context = used;
        }
        // Weaken back, one variable at a time, in context order.
        Context current = used;
        for (const auto &b : unused) {
            current.push_back(b);
            Context ordered;
            for (const auto &x : ctx) {
                if (lookup(current, x.name) != nullptr) {
                    ordered.push_back(x);
                }
            }
            d = node(Rule::Weak, ordered, t, goal, {std::move(*d)});
        }
        return d;
    }

  private:
    std::size_t fuel_;
    std::size_t depth_ = 0;
    std::string failure_ = "no rule applies";
    std::size_t counter_ = 0;
    std::map<std::string, std::optional<Derivation>> memo_;
    std::map<std::string, std::optional<Derivation>> synth_memo_;

    std::nullopt_t fail(std::size_t depth, const Context &ctx, const DistPtr &t, const TypePtr &goal,
                        const std::string &why) {
        if (depth >= depth_) {
            depth_ = depth;
            failure_ = to_string(TypingJudgment{ctx, t, goal}) + ": " + why;
        }
        return std::nullopt;
    }

    std::string fresh(const std::string &hint, std::set<std::string> avoid) {
        std::string base = hint.empty() ? "v" : hint;
        return fresh_name(base, avoid);
    }

    static std::set<std::string> avoid_set(const Context &ctx, const std::set<std::string> &more) {
        return unite(names_of(ctx), more);
    }

    std::optional<Derivation> sub_to(Derivation d, const TypePtr &goal, std::size_t depth) {
        if (type_equal(d.conclusion.type, goal)) {
            return d;
        }
        if (!subtype(d.conclusion.type, goal)) {
            return fail(depth, d.conclusion.context, d.conclusion.term, goal,
                        to_string(d.conclusion.type) + " is not a subtype of the goal");
        }
        auto ctx = d.conclusion.context;
        auto t = d.conclusion.term;
        return node(Rule::Sub, std::move(ctx), std::move(t), goal, {std::move(d)});
    }

    std::optional<Split> split(const Context &ctx, const std::vector<std::set<std::string>> &uses,
                               const std::set<std::string> &avoid_more, const DistPtr &t, const TypePtr &goal,
                               std::size_t depth) {
        Split s;
        s.parts.resize(uses.size());
        s.renames.resize(uses.size());
        std::set<std::string> avoid = avoid_set(ctx, avoid_more);
        for (const auto &b : ctx) {
            std::vector<std::size_t> where;
            for (std::size_t i = 0; i < uses.size(); ++i) {
                if (uses[i].count(b.name)) {
                    where.push_back(i);
                }
            }
            if (where.size() > 1 && !is_pure_binding(b.type)) {
                return fail(depth, ctx, t, goal,
                            "variable " + b.name + ":" + to_string(b.type) + " is not pure and is used twice");
            }
            for (std::size_t k = 0; k < where.size(); ++k) {
                if (k == 0) {
                    s.parts[where[k]].push_back(b);
                    continue;
                }
                std::string y = fresh(b.name, avoid);
                avoid.insert(y);
                s.parts[where[k]].push_back(Binding{y, b.type});
                s.renames[where[k]].emplace_back(b.name, y);
                s.contractions.push_back(Contraction{b, y});
            }
        }
        return s;
    }

    static TermPtr rename(TermPtr t, const std::vector<std::pair<std::string, std::string>> &r) {
        for (const auto &[x, y] : r) {
            t = substitute(t, x, var(y));
        }
        return t;
    }

    static DistPtr rename(DistPtr d, const std::vector<std::pair<std::string, std::string>> &r) {
        for (const auto &[x, y] : r) {
            d = substitute(d, x, var(y));
        }
        return d;
    }

    // Undo the renamings of a split with Contr nodes; the last node gets
    // the original context and term.
    static Derivation contract(Derivation d, const Split &s, const Context &ctx, const DistPtr &t) {
        for (std::size_t k = s.contractions.size(); k-- > 0;) {
            const auto &c = s.contractions[k];
            Context smaller;
            for (const auto &b : d.conclusion.context) {
                if (b.name != c.copy) {
                    smaller.push_back(b);
                }
            }
            DistPtr term = substitute(d.conclusion.term, c.copy, var(c.kept.name));
            TypePtr type = d.conclusion.type;
            if (k == 0) {
                smaller = ctx;
                term = t;
            }
            d = node(Rule::Contr, std::move(smaller), std::move(term), std::move(type), {std::move(d)});
        }
        return d;
    }

    static Context joined(const Split &s) {
        Context out;
        for (const auto &p : s.parts) {
            out = concat(out, p);
        }
        return out;
    }

    // Candidate types for a constructor of the given result kind whose
    // derivation can be coerced to `goal` (itself first, then with sharp
    // components).
    static void intro_candidates(const TypePtr &goal, TypeKind kind, std::vector<TypePtr> &out) {
        if (goal->kind == kind) {
            out.push_back(goal);
            return;
        }
        if (goal->kind == TypeKind::Sharp) {
            const TypePtr x = goal->l;
            intro_candidates(x, kind, out);
            if (x->kind == kind) {
                const TypePtr l = normal_form(sharp(x->l));
                const TypePtr r = normal_form(sharp(x->r));
                out.push_back(kind == TypeKind::Sum ? sum_type(l, r) : prod_type(l, r));
            }
        }
    }

    static std::vector<TypePtr> lam_candidates(const TypePtr &goal) {
        const TypePtr g = normal_form(goal);
        switch (g->kind) {
        case TypeKind::Arrow:
        case TypeKind::UArrow:
            return {type_equal(goal, g) ? goal : g};
        case TypeKind::Sharp:
            return lam_candidates(g->l);
        case TypeKind::Flat:
            if (g->l->kind == TypeKind::UArrow) {
                return {pure_arrow(g->l->l, g->l->r)};
            }
            return {};
        default:
            return {};
        }
    }

    std::optional<Derivation> core(const Context &ctx, const DistPtr &t, const TypePtr &goal, std::size_t depth) {
        if (t->kind != DistKind::Single) {
            if (!ctx.empty() || !is_closed(t)) {
                return fail(depth, ctx, t, goal, "open sums and scalings are not covered by the rules");
            }
            const Tri r = realizes(canonicalize(t), goal, fuel_);
            if (r != Tri::Yes) {
                return fail(depth, ctx, t, goal, std::string("closed distribution check gave ") + to_string(r));
            }
            return leaf(Rule::Realize, ctx, t, goal);
        }
        const TermPtr &term = t->term;
        switch (term->kind) {
        case Kind::FVar:
            return sub_to(leaf(Rule::Axiom, ctx, t, ctx.front().type), goal, depth + 1);
        case Kind::Void:
            return sub_to(leaf(Rule::Void, ctx, t, unit_type()), goal, depth + 1);
        case Kind::BVar:
            return fail(depth, ctx, t, goal, "dangling bound variable");
        case Kind::Lam:
            return lambda(ctx, t, goal, depth);
        case Kind::Pair:
            return pair_rule(ctx, t, goal, depth);
        case Kind::Inl:
        case Kind::Inr:
            return injection(ctx, t, goal, depth);
        case Kind::App:
            return application(ctx, t, goal, depth);
        case Kind::Seq:
            return sequence(ctx, t, goal, depth);
        case Kind::LetPair:
            return let_rule(ctx, t, goal, depth);
        case Kind::Match:
            return match_rule(ctx, t, goal, depth);
        }
        return fail(depth, ctx, t, goal, "unknown term");
    }

    std::optional<Derivation> lambda(const Context &ctx, const DistPtr &t, const TypePtr &goal, std::size_t depth) {
        const TermPtr &term = t->term;
        const auto cands = lam_candidates(goal);
        if (cands.empty()) {
            return fail(depth, ctx, t, goal, "an abstraction needs an arrow type");
        }
        for (const auto &arrow : cands) {
            const bool pure = arrow->kind == TypeKind::Arrow;
            if (pure) {
                bool ok = true;
                for (const auto &b : ctx) {
                    ok = ok && is_pure_binding(b.type);
                }
                if (!ok) {
                    fail(depth, ctx, t, arrow, "A -> B needs a pure context");
                    continue;
                }
            }
            const std::string x = fresh(term->name, avoid_set(ctx, fv(t)));
            const DistPtr body = instantiate(term->d1, {var(x)});
            auto p = check(concat(ctx, {Binding{x, arrow->l}}), body, arrow->r, depth + 1);
            if (!p) {
                continue;
            }
            auto d = node(pure ? Rule::PureLam : Rule::UnitLam, ctx, t, arrow, {std::move(*p)});
            if (auto r = sub_to(std::move(d), goal, depth + 1)) {
                return r;
            }
        }
        return std::nullopt;
    }

    std::optional<Derivation> pair_rule(const Context &ctx, const DistPtr &t, const TypePtr &goal,
                                        std::size_t depth) {
        const TermPtr &term = t->term;
        std::vector<TypePtr> cands;
        intro_candidates(normal_form(goal), TypeKind::Prod, cands);
        if (cands.empty()) {
            return fail(depth, ctx, t, goal, "a pair needs a product type");
        }
        auto s = split(ctx, {fv(term->a), fv(term->b)}, fv(t), t, goal, depth);
        if (!s) {
            return std::nullopt;
        }
        const TermPtr v = rename(term->a, s->renames[0]);
        const TermPtr w = rename(term->b, s->renames[1]);
        for (const auto &c : cands) {
            auto p1 = check(s->parts[0], single(v), c->l, depth + 1);
            if (!p1) {
                continue;
            }
            auto p2 = check(s->parts[1], single(w), c->r, depth + 1);
            if (!p2) {
                continue;
            }
            auto d = node(Rule::Pair, joined(*s), single(pair(v, w)), c, {std::move(*p1), std::move(*p2)});
            if (auto r = sub_to(contract(std::move(d), *s, ctx, t), goal, depth + 1)) {
                return r;
            }
        }
        return std::nullopt;
    }

    std::optional<Derivation> injection(const Context &ctx, const DistPtr &t, const TypePtr &goal,
                                        std::size_t depth) {
        const TermPtr &term = t->term;
        const bool left = term->kind == Kind::Inl;
        std::vector<TypePtr> cands;
        intro_candidates(normal_form(goal), TypeKind::Sum, cands);
        if (cands.empty()) {
            return fail(depth, ctx, t, goal, "an injection needs a sum type");
        }
        for (const auto &c : cands) {
            auto p = check(ctx, single(term->a), left ? c->l : c->r, depth + 1);
            if (!p) {
                continue;
            }
            auto d = node(left ? Rule::InL : Rule::InR, ctx, t, c, {std::move(*p)});
            if (auto r = sub_to(std::move(d), goal, depth + 1)) {
                return r;
            }
        }
        return std::nullopt;
    }

    // Type synthesis for heads and scrutinees: variables, unit, booleans,
    // applications of synthesizable heads and pairs of those.
    std::optional<Derivation> synth(const Context &ctx, const TermPtr &term, std::size_t depth) {
        std::string key = to_string(ctx) + '\x1f' + to_string(term);
        if (auto it = synth_memo_.find(key); it != synth_memo_.end()) {
            return it->second;
        }
        auto d = synth_rules(ctx, term, depth);
        if (!d) {
            const DistPtr t = single(term);
            if (auto a = guess(ctx, t)) {
                d = check(ctx, t, *a, depth + 1);
            }
        }
        synth_memo_.emplace(std::move(key), d);
        return d;
    }

    std::optional<Derivation> synth_rules(const Context &ctx, const TermPtr &term, std::size_t depth) {
        const DistPtr t = single(term);
        switch (term->kind) {
        case Kind::FVar:
            if (ctx.size() == 1 && ctx[0].name == term->name) {
                return leaf(Rule::Axiom, ctx, t, ctx[0].type);
            }
            return std::nullopt;
        case Kind::Void:
            return leaf(Rule::Void, ctx, t, unit_type());
        case Kind::Inl:
        case Kind::Inr: {
            if (term->a->kind != Kind::Void) {
                return std::nullopt;
            }
            auto p = leaf(Rule::Void, {}, single(term->a), unit_type());
            return node(term->kind == Kind::Inl ? Rule::InL : Rule::InR, ctx, t, bool_type(), {std::move(p)});
        }
        case Kind::Pair: {
            auto s = split(ctx, {fv(term->a), fv(term->b)}, fv(t), t, unit_type(), depth);
            if (!s) {
                return std::nullopt;
            }
            const TermPtr v = rename(term->a, s->renames[0]);
            const TermPtr w = rename(term->b, s->renames[1]);
            auto p1 = synth(s->parts[0], v, depth + 1);
            auto p2 = p1 ? synth(s->parts[1], w, depth + 1) : std::nullopt;
            if (!p2) {
                return std::nullopt;
            }
            TypePtr a = prod_type(p1->conclusion.type, p2->conclusion.type);
            auto d = node(Rule::Pair, joined(*s), single(pair(v, w)), a, {std::move(*p1), std::move(*p2)});
            return contract(std::move(d), *s, ctx, t);
        }
        case Kind::App: {
            auto s = split(ctx, {fv(term->a), fv(term->b)}, fv(t), t, unit_type(), depth);
            if (!s) {
                return std::nullopt;
            }
            const TermPtr f = rename(term->a, s->renames[0]);
            const TermPtr x = rename(term->b, s->renames[1]);
            auto pf = synth(s->parts[0], f, depth + 1);
            if (!pf) {
                return synth_by_argument(*s, f, x, ctx, t, depth);
            }
            const TypePtr ft = normal_form(pf->conclusion.type);
            if (ft->kind != TypeKind::Arrow && ft->kind != TypeKind::UArrow) {
                return std::nullopt;
            }
            auto pf2 = sub_to(std::move(*pf), unit_arrow(ft->l, ft->r), depth + 1);
            auto px = pf2 ? check(s->parts[1], single(x), ft->l, depth + 1) : std::nullopt;
            if (!px) {
                return std::nullopt;
            }
            auto d = node(Rule::App, joined(*s), single(app(f, x)), ft->r, {std::move(*pf2), std::move(*px)});
            return contract(std::move(d), *s, ctx, t);
        }
        default:
            return std::nullopt;
        }
    }

    // A candidate type for terms with no synthesis rule. The caller
    // still checks it.
    static std::optional<TypePtr> guess(const Context &ctx, const DistPtr &d) { return Unifier().guess(ctx, d); }

    // Derivations of a head or scrutinee at the distinct types found by
    // the rules, by a guess over the whole term at the goal, and by a
    // local guess, in that order.
    std::vector<Derivation> candidates(const Context &part, const TermPtr &renamed, const Context &ctx,
                                       const DistPtr &t, const TypePtr &goal, const Term *target, std::size_t depth) {
        std::vector<Derivation> out;
        auto add = [&](std::optional<Derivation> d) {
            if (!d) {
                return;
            }
            for (const auto &e : out) {
                if (type_equal(e.conclusion.type, d->conclusion.type)) {
                    return;
                }
            }
            out.push_back(std::move(*d));
        };
        add(synth_rules(part, renamed, depth + 1));
        add(guided(part, renamed, ctx, t, goal, target, depth));
        add(synth(part, renamed, depth + 1));
        return out;
    }

    // Derivation for a renamed subterm, typed by a guess over the whole
    // term at the goal.
    std::optional<Derivation> guided(const Context &part, const TermPtr &renamed, const Context &ctx,
                                     const DistPtr &t, const TypePtr &goal, const Term *target, std::size_t depth) {
        auto a = Unifier().guess_at(ctx, t, goal, target);
        if (!a) {
            return std::nullopt;
        }
        return check(part, single(renamed), *a, depth + 1);
    }

    // f x with f not synthesizable: take the argument's type A and try the
    // result types A and #A (enough for endomorphisms such as gates).
    std::optional<Derivation> synth_by_argument(const Split &s, const TermPtr &f, const TermPtr &x,
                                                const Context &ctx, const DistPtr &t, std::size_t depth) {
        auto px = synth(s.parts[1], x, depth + 1);
        if (!px) {
            return std::nullopt;
        }
        const TypePtr a = px->conclusion.type;
        std::vector<TypePtr> cands{a};
        const TypePtr sharpened = normal_form(sharp(a));
        if (!type_equal(sharpened, a)) {
            cands.push_back(sharpened);
        }
        for (const auto &arg : cands) {
            auto pa = sub_to(*px, arg, depth + 1);
            if (!pa) {
                continue;
            }
            for (const auto &res : cands) {
                auto pf = check(s.parts[0], single(f), unit_arrow(arg, res), depth + 1);
                if (pf) {
                    auto d = node(Rule::App, joined(s), single(app(f, x)), res, {std::move(*pf), std::move(*pa)});
                    return contract(std::move(d), s, ctx, t);
                }
            }
        }
        return std::nullopt;
    }

    std::optional<Derivation> application(const Context &ctx, const DistPtr &t, const TypePtr &goal,
                                          std::size_t depth) {
        const TermPtr &term = t->term;
        auto s = split(ctx, {fv(term->a), fv(term->b)}, fv(t), t, goal, depth);
        if (!s) {
            return std::nullopt;
        }
        const TermPtr f = rename(term->a, s->renames[0]);
        const TermPtr x = rename(term->b, s->renames[1]);
        const DistPtr renamed = single(app(f, x));
        for (auto &pf : candidates(s->parts[0], f, ctx, t, goal, term->a.get(), depth)) {
            const TypePtr ft = normal_form(pf.conclusion.type);
            if (ft->kind != TypeKind::Arrow && ft->kind != TypeKind::UArrow) {
                fail(depth, ctx, t, goal, "head has non-arrow type " + to_string(pf.conclusion.type));
                continue;
            }
            auto pf2 = sub_to(std::move(pf), unit_arrow(ft->l, ft->r), depth + 1);
            auto px = pf2 ? check(s->parts[1], single(x), ft->l, depth + 1) : std::nullopt;
            if (px) {
                auto d = node(Rule::App, joined(*s), renamed, ft->r, {std::move(*pf2), std::move(*px)});
                if (auto r = sub_to(contract(std::move(d), *s, ctx, t), goal, depth + 1)) {
                    return r;
                }
            }
        }
        // Head not synthesizable: synthesize the argument and check the head.
        auto px = synth(s->parts[1], x, depth + 1);
        if (!px) {
            return fail(depth, ctx, t, goal, "cannot determine the argument type");
        }
        std::vector<TypePtr> args{px->conclusion.type};
        const TypePtr sharpened = normal_form(sharp(px->conclusion.type));
        if (!type_equal(sharpened, px->conclusion.type)) {
            args.push_back(sharpened);
        }
        for (const auto &a : args) {
            auto pa = sub_to(*px, a, depth + 1);
            auto pf = pa ? check(s->parts[0], single(f), unit_arrow(a, goal), depth + 1) : std::nullopt;
            if (pf) {
                auto d = node(Rule::App, joined(*s), renamed, goal, {std::move(*pf), std::move(*pa)});
                return contract(std::move(d), *s, ctx, t);
            }
        }
        return std::nullopt;
    }

    std::optional<Derivation> sequence(const Context &ctx, const DistPtr &t, const TypePtr &goal,
                                       std::size_t depth) {
        const TermPtr &term = t->term;
        auto s = split(ctx, {fv(term->a), fv(term->d1)}, fv(t), t, goal, depth);
        if (!s) {
            return std::nullopt;
        }
        const TermPtr head = rename(term->a, s->renames[0]);
        const DistPtr tail = rename(term->d1, s->renames[1]);
        const DistPtr renamed = single(seq(head, tail));
        const bool sharp_goal = goal->kind == TypeKind::Sharp;
        for (int pass = 0; pass < (sharp_goal ? 2 : 1); ++pass) {
            const TypePtr unit = pass == 0 ? unit_type() : sharp(unit_type());
            auto p1 = check(s->parts[0], single(head), unit, depth + 1);
            if (!p1) {
                continue;
            }
            auto p2 = check(s->parts[1], tail, goal, depth + 1);
            if (!p2) {
                continue;
            }
            auto d =
                node(pass == 0 ? Rule::Seq : Rule::SeqSharp, joined(*s), renamed, goal, {std::move(*p1), std::move(*p2)});
            return contract(std::move(d), *s, ctx, t);
        }
        return std::nullopt;
    }

    std::optional<Derivation> let_rule(const Context &ctx, const DistPtr &t, const TypePtr &goal,
                                       std::size_t depth) {
        const TermPtr &term = t->term;
        auto s = split(ctx, {fv(term->a), fv(term->d1)}, fv(t), t, goal, depth);
        if (!s) {
            return std::nullopt;
        }
        const TermPtr scrut = rename(term->a, s->renames[0]);
        const DistPtr body = rename(term->d1, s->renames[1]);
        auto cands = candidates(s->parts[0], scrut, ctx, t, goal, term->a.get(), depth);
        if (cands.empty()) {
            return fail(depth, ctx, t, goal, "cannot determine the type of the let scrutinee");
        }
        for (const auto &c : cands) {
            if (auto d = let_with(ctx, t, goal, depth, *s, scrut, body, c)) {
                return d;
            }
        }
        return std::nullopt;
    }

    std::optional<Derivation> let_with(const Context &ctx, const DistPtr &t, const TypePtr &goal, std::size_t depth,
                                        const Split &split_parts, const TermPtr &scrut, const DistPtr &body,
                                        const Derivation &scrutinee) {
        const TermPtr &term = t->term;
        const Split *s = &split_parts;
        const std::optional<Derivation> ps = scrutinee;
        const TypePtr st = normal_form(ps->conclusion.type);
        std::set<std::string> avoid = avoid_set(ctx, fv(t));
        for (const auto &b : s->parts[1]) {
            avoid.insert(b.name);
        }
        const std::string x = fresh(term->name, avoid);
        avoid.insert(x);
        const std::string y = fresh(term->name2, avoid);
        const DistPtr open = instantiate(body, {var(x), var(y)});
        const DistPtr renamed = single(let_pair(x, y, scrut, open));

        TypePtr prod;
        if (st->kind == TypeKind::Prod) {
            prod = st;
        } else if (st->kind == TypeKind::Sharp && st->l->kind == TypeKind::Prod) {
            prod = st->l;
        } else {
            return fail(depth, ctx, t, goal, "let scrutinee has non-product type " + to_string(st));
        }
        if (st->kind == TypeKind::Prod) {
            auto p1 = sub_to(*ps, st, depth + 1);
            auto p2 = p1 ? check(concat(s->parts[1], {Binding{x, st->l}, Binding{y, st->r}}), open, goal, depth + 1)
                         : std::nullopt;
            if (p2) {
                auto d = node(Rule::LetPair, joined(*s), renamed, goal, {std::move(*p1), std::move(*p2)});
                return contract(std::move(d), *s, ctx, t);
            }
        }
        if (goal->kind == TypeKind::Sharp) {
            auto p1 = sub_to(*ps, otimes(prod->l, prod->r), depth + 1);
            auto p2 = p1 ? check(concat(s->parts[1], {Binding{x, sharp(prod->l)}, Binding{y, sharp(prod->r)}}), open,
                                 goal, depth + 1)
                         : std::nullopt;
            if (p2) {
                auto d = node(Rule::LetTens, joined(*s), renamed, goal, {std::move(*p1), std::move(*p2)});
                return contract(std::move(d), *s, ctx, t);
            }
        }
        return std::nullopt;
    }

    std::optional<Derivation> match_rule(const Context &ctx, const DistPtr &t, const TypePtr &goal,
                                         std::size_t depth) {
        const TermPtr &term = t->term;
        auto s = split(ctx, {fv(term->a), unite(fv(term->d1), fv(term->d2))}, fv(t), t, goal, depth);
        if (!s) {
            return std::nullopt;
        }
        const TermPtr scrut = rename(term->a, s->renames[0]);
        const DistPtr left = rename(term->d1, s->renames[1]);
        const DistPtr right = rename(term->d2, s->renames[1]);
        auto cands = candidates(s->parts[0], scrut, ctx, t, goal, term->a.get(), depth);
        if (cands.empty()) {
            return fail(depth, ctx, t, goal, "cannot determine the type of the match scrutinee");
        }
        for (const auto &c : cands) {
            if (auto d = match_with(ctx, t, goal, depth, *s, scrut, left, right, c)) {
                return d;
            }
        }
        return std::nullopt;
    }

    std::optional<Derivation> match_with(const Context &ctx, const DistPtr &t, const TypePtr &goal, std::size_t depth,
                                        const Split &split_parts, const TermPtr &scrut, const DistPtr &left, const DistPtr &right,
                                        const Derivation &scrutinee) {
        const TermPtr &term = t->term;
        const Split *s = &split_parts;
        const std::optional<Derivation> ps = scrutinee;
        const TypePtr st = normal_form(ps->conclusion.type);
        std::set<std::string> avoid = avoid_set(ctx, fv(t));
        for (const auto &b : s->parts[1]) {
            avoid.insert(b.name);
        }
        const std::string x1 = fresh(term->name, avoid);
        avoid.insert(x1);
        const std::string x2 = fresh(term->name2, avoid);
        const DistPtr s1 = instantiate(left, {var(x1)});
        const DistPtr s2 = instantiate(right, {var(x2)});
        const DistPtr renamed = single(match(scrut, x1, s1, x2, s2));
        const Context &delta = s->parts[1];

        TypePtr sum;
        if (st->kind == TypeKind::Sum) {
            sum = st;
        } else if (st->kind == TypeKind::Sharp && st->l->kind == TypeKind::Sum) {
            sum = st->l;
        } else {
            return fail(depth, ctx, t, goal, "match scrutinee has non-sum type " + to_string(st));
        }
        if (st->kind == TypeKind::Sum) {
            auto p0 = sub_to(*ps, st, depth + 1);
            auto p1 = p0 ? check(concat(delta, {Binding{x1, st->l}}), s1, goal, depth + 1) : std::nullopt;
            auto p2 = p1 ? check(concat(delta, {Binding{x2, st->r}}), s2, goal, depth + 1) : std::nullopt;
            if (p2) {
                auto d = node(Rule::PureMatch, joined(*s), renamed, goal,
                              {std::move(*p0), std::move(*p1), std::move(*p2)});
                return contract(std::move(d), *s, ctx, t);
            }
        }
        if (goal->kind != TypeKind::Sharp) {
            return std::nullopt;
        }
        auto p0 = sub_to(*ps, oplus(sum->l, sum->r), depth + 1);
        if (!p0) {
            return std::nullopt;
        }
        OrthogonalityJudgment o{delta, {Binding{x1, sharp(sum->l)}}, s1, {Binding{x2, sharp(sum->r)}}, s2, goal};
        const auto rep = check_orthogonality(o, fuel_);
        if (rep.verdict != Tri::Yes) {
            return fail(depth + 1, ctx, t, goal,
                        std::string("branches are not orthogonal (") + to_string(rep.verdict) + "): " + rep.message);
        }
        Derivation d = node(Rule::UnitaryMatch, joined(*s), renamed, goal, {std::move(*p0)});
        d.orthogonality = std::move(o);
        return contract(std::move(d), *s, ctx, t);
    }
};

void print_tree(const Derivation &d, std::size_t indent, std::string &out) {
    out += std::string(indent * 2, ' ') + "[" + to_string(d.rule) + "] " + to_string(d.conclusion) + "\n";
    if (d.orthogonality) {
        out += std::string(indent * 2 + 2, ' ') + "[Orth] " + to_string(*d.orthogonality) + "\n";
    }
    for (const auto &p : d.premises) {
        print_tree(p, indent + 1, out);
    }
}

}  // namespace

const char *to_string(Rule r) {
    switch (r) {
    case Rule::Axiom:
        return "Axiom";
    case Rule::Sub:
        return "Sub";
    case Rule::PureLam:
        return "PureLam";
    case Rule::UnitLam:
        return "UnitLam";
    case Rule::App:
        return "App";
    case Rule::Void:
        return "Void";
    case Rule::Seq:
        return "Seq";
    case Rule::SeqSharp:
        return "SeqSharp";
    case Rule::Pair:
        return "Pair";
    case Rule::LetPair:
        return "LetPair";
    case Rule::LetTens:
        return "LetTens";
    case Rule::InL:
        return "InL";
    case Rule::InR:
        return "InR";
    case Rule::PureMatch:
        return "PureMatch";
    case Rule::Weak:
        return "Weak";
    case Rule::Contr:
        return "Contr";
    case Rule::UnitaryMatch:
        return "UnitaryMatch";
    case Rule::Realize:
        return "Realize";
    }
    return "?";
}

std::string to_string(const TypingJudgment &j) {
    std::string ctx = to_string(j.context);
    return (ctx.empty() ? "" : ctx + " ") + "|- " + to_string(j.term, 8) + " : " + to_string(j.type);
}

std::string to_string(const OrthogonalityJudgment &j) {
    std::string ctx = to_string(j.shared);
    return (ctx.empty() ? "" : ctx + " ") + "|- <" + to_string(j.left_context) + " | " + to_string(j.left, 8) +
           " _|_ " + to_string(j.right_context) + " | " + to_string(j.right, 8) + "> : " + to_string(j.type);
}

std::string to_string(const Derivation &d) {
    std::string out;
    print_tree(d, 0, out);
    return out;
}

std::set<std::string> strict_domain(const Context &ctx) {
    std::set<std::string> out;
    for (const auto &b : ctx) {
        if (!is_pure_type(b.type)) {
            out.insert(b.name);
        }
    }
    return out;
}

CheckResult check_derivation(const Derivation &d, std::size_t fuel) {
    Checker c(fuel);
    if (auto bad = c.node(d)) {
        return CheckResult{false, *bad};
    }
    return CheckResult{};
}

std::optional<Derivation> try_infer(const Context &ctx, const DistPtr &t, const TypePtr &goal, std::size_t fuel,
                                    std::string *failure) {
    if (has_duplicates(ctx)) {
        if (failure != nullptr) {
            *failure = "context has a repeated variable";
        }
        return std::nullopt;
    }
    Inferrer inf(fuel);
    auto d = inf.check(ctx, t, goal, 0);
    if (!d && failure != nullptr) {
        *failure = inf.failure();
    }
    return d;
}

Derivation infer(const Context &ctx, const DistPtr &t, const TypePtr &goal, std::size_t fuel) {
    std::string why;
    auto d = try_infer(ctx, t, goal, fuel, &why);
    if (!d) {
        throw NoDerivation(why);
    }
    return std::move(*d);
}

SemanticReport validate_semantically(const TypingJudgment &j, std::size_t fuel) {
    if (auto bad = domain_condition(j)) {
        return {Tri::No, *bad};
    }
    std::vector<std::vector<Canonical>> probes;
    std::vector<std::size_t> sizes;
    try {
        for (const auto &b : j.context) {
            probes.push_back(probes_of(normal_form(b.type)));
            sizes.push_back(probes.back().size());
        }
    } catch (const UnsupportedType &e) {
        return {Tri::Unsupported, e.what()};
    }
    if (product_size(sizes) > kMaxProbes) {
        return {Tri::Unsupported, "too many probe substitutions"};
    }
    const Canonical t = canonicalize(j.term);
    SemanticReport rep{Tri::Yes, ""};
    for_each_combination(sizes, [&](const std::vector<std::size_t> &idx) {
        std::vector<std::pair<std::string, Canonical>> sigma;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            sigma.emplace_back(j.context[k].name, probes[k][idx[k]]);
        }
        Tri r;
        try {
            r = realizes(substitute_all(t, sigma), j.type, fuel);
        } catch (const UnsupportedType &e) {
            r = Tri::Unsupported;
        }
        if (r == Tri::No) {
            rep = {Tri::No, "fails under " + describe(sigma)};
            return false;
        }
        if (r == Tri::Unsupported && rep.verdict == Tri::Yes) {
            rep = {Tri::Unsupported, "undecided under " + describe(sigma)};
        }
        return true;
    });
    return rep;
}

SemanticReport check_orthogonality(const OrthogonalityJudgment &j, std::size_t fuel) {
    const Context left_ctx = concat(j.shared, j.left_context);
    const Context right_ctx = concat(j.shared, j.right_context);
    const auto v1 = validate_semantically({left_ctx, j.left, j.type}, fuel);
    if (v1.verdict == Tri::No) {
        return {Tri::No, "left judgment is not valid: " + v1.message};
    }
    const auto v2 = validate_semantically({right_ctx, j.right, j.type}, fuel);
    if (v2.verdict == Tri::No) {
        return {Tri::No, "right judgment is not valid: " + v2.message};
    }

    // Shared variables pick one block for both sides, then a basis element
    // per side independently. Side variables range over all basis values.
    std::vector<std::vector<std::vector<TermPtr>>> shared_blocks;
    std::vector<std::vector<TermPtr>> left_basis;
    std::vector<std::vector<TermPtr>> right_basis;
    try {
        for (const auto &b : j.shared) {
            shared_blocks.push_back(blocks_of(normal_form(b.type)));
        }
        auto flat_basis = [](const TypePtr &a) {
            std::vector<TermPtr> out;
            for (const auto &blk : blocks_of(normal_form(a))) {
                out.insert(out.end(), blk.begin(), blk.end());
            }
            return out;
        };
        for (const auto &b : j.left_context) {
            left_basis.push_back(flat_basis(b.type));
        }
        for (const auto &b : j.right_context) {
            right_basis.push_back(flat_basis(b.type));
        }
    } catch (const UnsupportedType &e) {
        return {Tri::Unsupported, e.what()};
    }

    SemanticReport rep{tri_and(v1.verdict, v2.verdict), ""};
    if (rep.verdict == Tri::Unsupported) {
        rep.message = v1.verdict == Tri::Unsupported ? v1.message : v2.message;
    }

    // Normal forms of one side for every substitution drawn from the chosen
    // shared blocks. Nullopt on fuel exhaustion.
    auto side = [&](const Canonical &t, const Context &own, const std::vector<std::vector<TermPtr>> &own_basis,
                    const std::vector<std::size_t> &block_of_shared,
                    std::vector<std::pair<std::string, Canonical>> &last_sigma)
        -> std::optional<std::vector<std::pair<Canonical, std::string>>> {
        std::vector<std::size_t> sizes;
        for (std::size_t k = 0; k < j.shared.size(); ++k) {
            sizes.push_back(shared_blocks[k][block_of_shared[k]].size());
        }
        for (const auto &b : own_basis) {
            sizes.push_back(b.size());
        }
        std::vector<std::pair<Canonical, std::string>> out;
        bool ok = true;
        for_each_combination(sizes, [&](const std::vector<std::size_t> &idx) {
            std::vector<std::pair<std::string, Canonical>> sigma;
            for (std::size_t k = 0; k < j.shared.size(); ++k) {
                sigma.emplace_back(j.shared[k].name, unit_vector(shared_blocks[k][block_of_shared[k]][idx[k]]));
            }
            for (std::size_t k = 0; k < own.size(); ++k) {
                sigma.emplace_back(own[k].name, unit_vector(own_basis[k][idx[j.shared.size() + k]]));
            }
            auto res = normalize(substitute_all(t, sigma), fuel);
            if (!res.normal) {
                last_sigma = sigma;
                ok = false;
                return false;
            }
            out.emplace_back(std::move(res.result), describe(sigma));
            return true;
        });
        if (!ok) {
            return std::nullopt;
        }
        return out;
    };

    const Canonical t1 = canonicalize(j.left);
    const Canonical t2 = canonicalize(j.right);
    std::vector<std::size_t> block_counts;
    for (const auto &b : shared_blocks) {
        block_counts.push_back(b.size());
    }
    for_each_combination(block_counts, [&](const std::vector<std::size_t> &blocks) {
        std::vector<std::pair<std::string, Canonical>> stuck;
        auto l = side(t1, j.left_context, left_basis, blocks, stuck);
        auto r = l ? side(t2, j.right_context, right_basis, blocks, stuck) : std::nullopt;
        if (!r) {
            rep = {Tri::Unsupported, "out of fuel under " + describe(stuck)};
            return true;
        }
        for (const auto &[a, sa] : *l) {
            for (const auto &[b, sb] : *r) {
                Scalar ip;
                try {
                    ip = inner_product(a, b);
                } catch (const Error &e) {
                    rep = {Tri::No, std::string("normal form is not a value: ") + e.what()};
                    return false;
                }
                if (!near_zero(ip)) {
                    rep = {Tri::No, "inner product " + format_scalar(ip) + " between " + sa + " and " + sb};
                    return false;
                }
            }
        }
        return true;
    });
    return rep;
}

}  // namespace ulc
