#include "ulc/eval.hpp"

#include "ulc/errors.hpp"

namespace ulc {

std::optional<DistPtr> atomic_step(const TermPtr &t) {
    switch (t->kind) {
    case Kind::App: {
        const TermPtr &s = t->a;
        const TermPtr &u = t->b;
        if (auto r = atomic_step(u)) {
            return lift_raw(Ctor::App, {single(s), *r});
        }
        if (!is_value(u)) {
            return std::nullopt;
        }
        if (s->kind == Kind::Lam) {
            return instantiate(s->d1, {u});
        }
        if (auto r = atomic_step(s)) {
            return lift_raw(Ctor::App, {*r, single(u)});
        }
        return std::nullopt;
    }
    case Kind::Seq:
        if (t->a->kind == Kind::Void) {
            return t->d1;
        }
        if (auto r = atomic_step(t->a)) {
            return lift_raw(Ctor::Seq, {*r}, LiftShape{.body1 = t->d1});
        }
        return std::nullopt;
    case Kind::LetPair:
        if (t->a->kind == Kind::Pair) {
            return instantiate(t->d1, {t->a->a, t->a->b});
        }
        if (auto r = atomic_step(t->a)) {
            return lift_raw(Ctor::LetPair, {*r}, LiftShape{.h1 = t->name, .h2 = t->name2, .body1 = t->d1});
        }
        return std::nullopt;
    case Kind::Match:
        if (t->a->kind == Kind::Inl) {
            return instantiate(t->d1, {t->a->a});
        }
        if (t->a->kind == Kind::Inr) {
            return instantiate(t->d2, {t->a->a});
        }
        if (auto r = atomic_step(t->a)) {
            return lift_raw(Ctor::Match, {*r},
                            LiftShape{.h1 = t->name, .h2 = t->name2, .body1 = t->d1, .body2 = t->d2});
        }
        return std::nullopt;
    default:
        return std::nullopt;
    }
}

bool is_reducible(const TermPtr &t) {
    switch (t->kind) {
    case Kind::App:
        if (is_reducible(t->b)) {
            return true;
        }
        return is_value(t->b) && (t->a->kind == Kind::Lam || is_reducible(t->a));
    case Kind::Seq:
        return t->a->kind == Kind::Void || is_reducible(t->a);
    case Kind::LetPair:
        return t->a->kind == Kind::Pair || is_reducible(t->a);
    case Kind::Match:
        return t->a->kind == Kind::Inl || t->a->kind == Kind::Inr || is_reducible(t->a);
    default:
        return false;
    }
}

namespace {

Canonical replace_at(const Canonical &d, std::size_t index, const DistPtr &reduct) {
    std::vector<Summand> out;
    const auto &items = d.summands();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i != index) {
            out.push_back(items[i]);
        }
    }
    for (const auto &s : canonicalize(reduct)) {
        out.push_back({s.coef * items[index].coef, s.term});
    }
    return canonicalize_summands(std::move(out));
}

}  // namespace

std::optional<Canonical> one_step(const Canonical &d) {
    const auto &items = d.summands();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (auto r = atomic_step(items[i].term)) {
            return replace_at(d, i, *r);
        }
    }
    return std::nullopt;
}

Canonical step_with_decomposition(const Canonical &d, const TermPtr &s, Scalar alpha) {
    auto c = d.coefficient(s);
    if (!c) {
        throw DecompositionError("term is not in the domain of the distribution");
    }
    auto reduct = atomic_step(s);
    if (!reduct) {
        throw DecompositionError("chosen term is not reducible");
    }
    std::vector<Summand> out;
    for (const auto &item : d) {
        if (compare(item.term, s) == 0) {
            if (!near(alpha, *c)) {
                out.push_back({*c - alpha, item.term});
            }
        } else {
            out.push_back(item);
        }
    }
    for (const auto &r : canonicalize(*reduct)) {
        out.push_back({alpha * r.coef, r.term});
    }
    return canonicalize_summands(std::move(out));
}

bool is_normal(const Canonical &d) {
    for (const auto &s : d) {
        if (is_reducible(s.term)) {
            return false;
        }
    }
    return true;
}

EvalOutcome normalize(const Canonical &d, std::size_t fuel, const TraceFn &trace) {
    EvalOutcome out{.normal = false, .result = d, .steps = 0};
    if (trace) {
        trace(out.result);
    }
    while (true) {
        if (is_normal(out.result)) {
            out.normal = true;
            return out;
        }
        if (out.steps >= fuel) {
            return out;
        }
        out.result = *one_step(out.result);
        ++out.steps;
        if (trace) {
            trace(out.result);
        }
    }
}

EvalOutcome normalize_with(const Canonical &d, std::size_t fuel, const Scheduler &pick) {
    EvalOutcome out{.normal = false, .result = d, .steps = 0};
    while (true) {
        std::vector<std::size_t> reducible;
        const auto &items = out.result.summands();
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (is_reducible(items[i].term)) {
                reducible.push_back(i);
            }
        }
        if (reducible.empty()) {
            out.normal = true;
            return out;
        }
        if (out.steps >= fuel) {
            return out;
        }
        std::size_t i = pick(reducible);
        out.result = replace_at(out.result, i, *atomic_step(items[i].term));
        ++out.steps;
    }
}

TermPtr y_combinator(const TermPtr &t) {
    if (occurs_free("x", t)) {
        throw Error("Y_t expects t not to mention x");
    }
    TermPtr half = lam("x", sum(single(t), single(app(var("x"), var("x")))));
    return app(half, half);
}

}  // namespace ulc
