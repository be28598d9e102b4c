#include "ulc/term.hpp"

#include <functional>

#include "ulc/errors.hpp"

namespace ulc {

namespace {

TermPtr make(Term t) { return std::make_shared<const Term>(std::move(t)); }
DistPtr make(Dist d) { return std::make_shared<const Dist>(std::move(d)); }

// Rebuild a term bottom-up, calling `leaf` on every variable occurrence
// with the current binder depth. Subtrees that come back unchanged are
// shared rather than copied.
using LeafFn = std::function<TermPtr(const TermPtr &, std::size_t)>;

DistPtr map_dist(const DistPtr &d, std::size_t depth, const LeafFn &leaf);

TermPtr map_term(const TermPtr &t, std::size_t depth, const LeafFn &leaf) {
    switch (t->kind) {
    case Kind::BVar:
    case Kind::FVar:
        return leaf(t, depth);
    case Kind::Void:
        return t;
    default:
        break;
    }
    Term out = *t;
    std::size_t inner = depth;
    switch (t->kind) {
    case Kind::Lam:
    case Kind::Match:
        inner = depth + 1;
        break;
    case Kind::LetPair:
        inner = depth + 2;
        break;
    default:
        break;
    }
    if (t->a) {
        out.a = map_term(t->a, depth, leaf);
    }
    if (t->b) {
        out.b = map_term(t->b, depth, leaf);
    }
    if (t->d1) {
        out.d1 = map_dist(t->d1, inner, leaf);
    }
    if (t->d2) {
        out.d2 = map_dist(t->d2, inner, leaf);
    }
    if (out.a == t->a && out.b == t->b && out.d1 == t->d1 && out.d2 == t->d2) {
        return t;
    }
    return make(std::move(out));
}

DistPtr map_dist(const DistPtr &d, std::size_t depth, const LeafFn &leaf) {
    switch (d->kind) {
    case DistKind::Zero:
        return d;
    case DistKind::Single: {
        TermPtr t = map_term(d->term, depth, leaf);
        return t == d->term ? d : single(t);
    }
    case DistKind::Sum: {
        DistPtr a = map_dist(d->a, depth, leaf);
        DistPtr b = map_dist(d->b, depth, leaf);
        return (a == d->a && b == d->b) ? d : sum(a, b);
    }
    case DistKind::Scale: {
        DistPtr a = map_dist(d->a, depth, leaf);
        return a == d->a ? d : scale(d->coef, a);
    }
    }
    return d;
}

int cmp_size(std::size_t a, std::size_t b) { return a < b ? -1 : (a > b ? 1 : 0); }

void collect_free(const TermPtr &t, std::set<std::string> &out);

void collect_free(const DistPtr &d, std::set<std::string> &out) {
    switch (d->kind) {
    case DistKind::Zero:
        return;
    case DistKind::Single:
        collect_free(d->term, out);
        return;
    case DistKind::Sum:
        collect_free(d->a, out);
        collect_free(d->b, out);
        return;
    case DistKind::Scale:
        collect_free(d->a, out);
        return;
    }
}

void collect_free(const TermPtr &t, std::set<std::string> &out) {
    if (t->kind == Kind::FVar) {
        out.insert(t->name);
        return;
    }
    if (t->a) {
        collect_free(t->a, out);
    }
    if (t->b) {
        collect_free(t->b, out);
    }
    if (t->d1) {
        collect_free(t->d1, out);
    }
    if (t->d2) {
        collect_free(t->d2, out);
    }
}

bool occurs(const std::string &x, const DistPtr &d);

bool occurs(const std::string &x, const TermPtr &t) {
    if (t->kind == Kind::FVar) {
        return t->name == x;
    }
    return (t->a && occurs(x, t->a)) || (t->b && occurs(x, t->b)) || (t->d1 && occurs(x, t->d1)) ||
           (t->d2 && occurs(x, t->d2));
}

bool occurs(const std::string &x, const DistPtr &d) {
    switch (d->kind) {
    case DistKind::Zero:
        return false;
    case DistKind::Single:
        return occurs(x, d->term);
    case DistKind::Sum:
        return occurs(x, d->a) || occurs(x, d->b);
    case DistKind::Scale:
        return occurs(x, d->a);
    }
    return false;
}

}  // namespace

TermPtr var(const std::string &name) { return make(Term{.kind = Kind::FVar, .name = name}); }

TermPtr bvar(std::size_t index) { return make(Term{.kind = Kind::BVar, .index = index}); }

TermPtr lam(const std::string &x, DistPtr body) { return lam_raw(x, abstract(body, {x})); }

TermPtr lam_raw(const std::string &hint, DistPtr body) {
    return make(Term{.kind = Kind::Lam, .name = hint, .d1 = std::move(body)});
}

TermPtr void_term() {
    static const TermPtr v = make(Term{.kind = Kind::Void});
    return v;
}

TermPtr pair(TermPtr v, TermPtr w) {
    if (!is_value(v) || !is_value(w)) {
        throw ShapeError("pair components must be pure values");
    }
    return make(Term{.kind = Kind::Pair, .a = std::move(v), .b = std::move(w)});
}

TermPtr inl(TermPtr v) {
    if (!is_value(v)) {
        throw ShapeError("inl payload must be a pure value");
    }
    return make(Term{.kind = Kind::Inl, .a = std::move(v)});
}

TermPtr inr(TermPtr v) {
    if (!is_value(v)) {
        throw ShapeError("inr payload must be a pure value");
    }
    return make(Term{.kind = Kind::Inr, .a = std::move(v)});
}

TermPtr tt() {
    static const TermPtr v = inl(void_term());
    return v;
}

TermPtr ff() {
    static const TermPtr v = inr(void_term());
    return v;
}

TermPtr app(TermPtr s, TermPtr t) { return make(Term{.kind = Kind::App, .a = std::move(s), .b = std::move(t)}); }

TermPtr seq(TermPtr t, DistPtr s) { return make(Term{.kind = Kind::Seq, .a = std::move(t), .d1 = std::move(s)}); }

TermPtr let_pair(const std::string &x, const std::string &y, TermPtr t, DistPtr body) {
    return let_pair_raw(x, y, std::move(t), abstract(body, {x, y}));
}

TermPtr let_pair_raw(const std::string &hx, const std::string &hy, TermPtr t, DistPtr body) {
    return make(Term{.kind = Kind::LetPair, .name = hx, .name2 = hy, .a = std::move(t), .d1 = std::move(body)});
}

TermPtr match(TermPtr t, const std::string &x1, DistPtr s1, const std::string &x2, DistPtr s2) {
    return match_raw(std::move(t), x1, abstract(s1, {x1}), x2, abstract(s2, {x2}));
}

TermPtr match_raw(TermPtr t, const std::string &h1, DistPtr s1, const std::string &h2, DistPtr s2) {
    return make(Term{.kind = Kind::Match,
                     .name = h1,
                     .name2 = h2,
                     .a = std::move(t),
                     .d1 = std::move(s1),
                     .d2 = std::move(s2)});
}

TermPtr if_then_else(TermPtr t, DistPtr s1, DistPtr s2) {
    // Bodies are closed over the branch variable by position: index 0 is
    // the branch binder, existing indices in s1/s2 are shifted past it.
    auto shift = [](const DistPtr &d) {
        return map_dist(d, 0, [](const TermPtr &leaf, std::size_t depth) -> TermPtr {
            if (leaf->kind == Kind::BVar && leaf->index >= depth) {
                return bvar(leaf->index + 1);
            }
            return leaf;
        });
    };
    return match_raw(std::move(t), "x1", single(seq(bvar(0), shift(s1))), "x2", single(seq(bvar(0), shift(s2))));
}

TermPtr pair_term(TermPtr s, TermPtr t) {
    if (is_value(s) && is_value(t)) {
        return pair(std::move(s), std::move(t));
    }
    std::set<std::string> avoid = free_vars(s);
    for (const auto &x : free_vars(t)) {
        avoid.insert(x);
    }
    const std::string a = fresh_name("a", avoid);
    avoid.insert(a);
    const std::string b = fresh_name("b", avoid);
    if (is_value(s)) {
        return app(lam(b, single(pair(s, var(b)))), std::move(t));
    }
    if (is_value(t)) {
        return app(lam(a, single(pair(var(a), t))), std::move(s));
    }
    return app(lam(b, single(app(lam(a, single(pair(var(a), var(b)))), std::move(s)))), std::move(t));
}

DistPtr zero() {
    static const DistPtr z = make(Dist{.kind = DistKind::Zero});
    return z;
}

DistPtr single(TermPtr t) { return make(Dist{.kind = DistKind::Single, .term = std::move(t)}); }

DistPtr sum(DistPtr a, DistPtr b) { return make(Dist{.kind = DistKind::Sum, .a = std::move(a), .b = std::move(b)}); }

DistPtr scale(Scalar c, DistPtr d) {
    if (!is_finite(c)) {
        throw Error("non-finite scalar");
    }
    return make(Dist{.kind = DistKind::Scale, .coef = c, .a = std::move(d)});
}

DistPtr scale(Scalar c, TermPtr t) { return scale(c, single(std::move(t))); }

DistPtr sum_all(const std::vector<DistPtr> &items) {
    if (items.empty()) {
        return zero();
    }
    DistPtr acc = items.front();
    for (std::size_t i = 1; i < items.size(); ++i) {
        acc = sum(acc, items[i]);
    }
    return acc;
}

bool is_value(const Term &t) {
    switch (t.kind) {
    case Kind::BVar:
    case Kind::FVar:
    case Kind::Lam:
    case Kind::Void:
    case Kind::Pair:
    case Kind::Inl:
    case Kind::Inr:
        return true;
    default:
        return false;
    }
}

bool is_value(const TermPtr &t) { return is_value(*t); }

bool is_tt(const TermPtr &t) { return t->kind == Kind::Inl && t->a->kind == Kind::Void; }

bool is_ff(const TermPtr &t) { return t->kind == Kind::Inr && t->a->kind == Kind::Void; }

int compare(const TermPtr &a, const TermPtr &b) {
    if (a == b) {
        return 0;
    }
    if (a->kind != b->kind) {
        return a->kind < b->kind ? -1 : 1;
    }
    switch (a->kind) {
    case Kind::BVar:
        return cmp_size(a->index, b->index);
    case Kind::FVar:
        return a->name < b->name ? -1 : (a->name > b->name ? 1 : 0);
    case Kind::Void:
        return 0;
    default:
        break;
    }
    if (a->a) {
        if (int c = compare(a->a, b->a)) {
            return c;
        }
    }
    if (a->b) {
        if (int c = compare(a->b, b->b)) {
            return c;
        }
    }
    if (a->d1) {
        if (int c = compare(a->d1, b->d1)) {
            return c;
        }
    }
    if (a->d2) {
        if (int c = compare(a->d2, b->d2)) {
            return c;
        }
    }
    return 0;
}

int compare(const DistPtr &a, const DistPtr &b) {
    if (a == b) {
        return 0;
    }
    if (a->kind != b->kind) {
        return a->kind < b->kind ? -1 : 1;
    }
    switch (a->kind) {
    case DistKind::Zero:
        return 0;
    case DistKind::Single:
        return compare(a->term, b->term);
    case DistKind::Sum:
        if (int c = compare(a->a, b->a)) {
            return c;
        }
        return compare(a->b, b->b);
    case DistKind::Scale:
        if (int c = compare_scalars(a->coef, b->coef)) {
            return c;
        }
        return compare(a->a, b->a);
    }
    return 0;
}

bool alpha_equal(const TermPtr &a, const TermPtr &b) { return compare(a, b) == 0; }

bool alpha_equal(const DistPtr &a, const DistPtr &b) { return compare(a, b) == 0; }

std::set<std::string> free_vars(const TermPtr &t) {
    std::set<std::string> out;
    collect_free(t, out);
    return out;
}

std::set<std::string> free_vars(const DistPtr &d) {
    std::set<std::string> out;
    collect_free(d, out);
    return out;
}

bool occurs_free(const std::string &x, const TermPtr &t) { return occurs(x, t); }

bool occurs_free(const std::string &x, const DistPtr &d) { return occurs(x, d); }

bool is_closed(const TermPtr &t) { return free_vars(t).empty(); }

bool is_closed(const DistPtr &d) { return free_vars(d).empty(); }

DistPtr abstract(const DistPtr &d, const std::vector<std::string> &names) {
    const std::size_t n = names.size();
    return map_dist(d, 0, [&](const TermPtr &leaf, std::size_t depth) -> TermPtr {
        if (leaf->kind == Kind::FVar) {
            // Later names shadow earlier ones, so search from the back.
            for (std::size_t j = n; j-- > 0;) {
                if (names[j] == leaf->name) {
                    return bvar(depth + (n - 1 - j));
                }
            }
        }
        return leaf;
    });
}

DistPtr instantiate(const DistPtr &d, const std::vector<TermPtr> &values) {
    const std::size_t n = values.size();
    return map_dist(d, 0, [&](const TermPtr &leaf, std::size_t depth) -> TermPtr {
        if (leaf->kind == Kind::BVar && leaf->index >= depth) {
            std::size_t k = leaf->index - depth;
            if (k < n) {
                return values[n - 1 - k];
            }
            return bvar(leaf->index - n);
        }
        return leaf;
    });
}

TermPtr substitute(const TermPtr &t, const std::string &x, const TermPtr &w) {
    if (!is_value(w)) {
        throw ShapeError("pure substitution expects a pure value");
    }
    return map_term(t, 0, [&](const TermPtr &leaf, std::size_t) -> TermPtr {
        return (leaf->kind == Kind::FVar && leaf->name == x) ? w : leaf;
    });
}

DistPtr substitute(const DistPtr &d, const std::string &x, const TermPtr &w) {
    if (!is_value(w)) {
        throw ShapeError("pure substitution expects a pure value");
    }
    return map_dist(d, 0, [&](const TermPtr &leaf, std::size_t) -> TermPtr {
        return (leaf->kind == Kind::FVar && leaf->name == x) ? w : leaf;
    });
}

DistPtr pure_substitute(const DistPtr &d, const std::string &x, const TermPtr &w) { return substitute(d, x, w); }

TermPtr church(unsigned n) {
    TermPtr body = var("x");
    for (unsigned i = 0; i < n; ++i) {
        body = app(var("f"), body);
    }
    return lam("f", single(lam("x", single(body))));
}

std::string fresh_name(const std::string &base, const std::set<std::string> &avoid) {
    std::string stem = base.empty() ? "x" : base;
    if (!avoid.contains(stem)) {
        return stem;
    }
    for (std::size_t i = 1;; ++i) {
        std::string candidate = stem + std::to_string(i);
        if (!avoid.contains(candidate)) {
            return candidate;
        }
    }
}

std::size_t term_size(const TermPtr &t) {
    std::size_t n = 1;
    if (t->a) {
        n += term_size(t->a);
    }
    if (t->b) {
        n += term_size(t->b);
    }
    if (t->d1) {
        n += term_size(t->d1);
    }
    if (t->d2) {
        n += term_size(t->d2);
    }
    return n;
}

std::size_t term_size(const DistPtr &d) {
    switch (d->kind) {
    case DistKind::Zero:
        return 1;
    case DistKind::Single:
        return term_size(d->term);
    case DistKind::Sum:
        return 1 + term_size(d->a) + term_size(d->b);
    case DistKind::Scale:
        return 1 + term_size(d->a);
    }
    return 1;
}

}  // namespace ulc
