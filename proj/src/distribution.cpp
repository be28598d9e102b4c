#include "ulc/distribution.hpp"

#include <algorithm>
#include <functional>

#include "ulc/errors.hpp"

namespace ulc {

namespace {

void flatten(const DistPtr &d, Scalar factor, std::vector<Summand> &out) {
    switch (d->kind) {
    case DistKind::Zero:
        return;
    case DistKind::Single:
        out.push_back({factor, d->term});
        return;
    case DistKind::Sum:
        flatten(d->a, factor, out);
        flatten(d->b, factor, out);
        return;
    case DistKind::Scale:
        flatten(d->a, factor * d->coef, out);
        return;
    }
}

TermPtr build(Ctor kind, const std::vector<TermPtr> &parts, const LiftShape &shape) {
    switch (kind) {
    case Ctor::Pair:
        return pair(parts.at(0), parts.at(1));
    case Ctor::Inl:
        return inl(parts.at(0));
    case Ctor::Inr:
        return inr(parts.at(0));
    case Ctor::App:
        return app(parts.at(0), parts.at(1));
    case Ctor::Seq:
        return seq(parts.at(0), shape.body1);
    case Ctor::LetPair:
        return let_pair_raw(shape.h1, shape.h2, parts.at(0), shape.body1);
    case Ctor::Match:
        return match_raw(parts.at(0), shape.h1, shape.body1, shape.h2, shape.body2);
    }
    throw Error("unknown constructor");
}

std::size_t arity(Ctor kind) {
    switch (kind) {
    case Ctor::Pair:
    case Ctor::App:
        return 2;
    default:
        return 1;
    }
}

bool value_only(Ctor kind) { return kind == Ctor::Pair || kind == Ctor::Inl || kind == Ctor::Inr; }

}  // namespace

Canonical Canonical::of(TermPtr t, Scalar c) { return canonicalize_summands({Summand{c, std::move(t)}}); }

std::optional<Scalar> Canonical::coefficient(const TermPtr &t) const {
    auto it = std::lower_bound(summands_.begin(), summands_.end(), t,
                               [](const Summand &s, const TermPtr &key) { return compare(s.term, key) < 0; });
    if (it != summands_.end() && compare(it->term, t) == 0) {
        return it->coef;
    }
    return std::nullopt;
}

bool Canonical::contains(const TermPtr &t) const { return coefficient(t).has_value(); }

Canonical Canonical::operator+(const Canonical &other) const {
    std::vector<Summand> all = summands_;
    all.insert(all.end(), other.summands_.begin(), other.summands_.end());
    return canonicalize_summands(std::move(all));
}

Canonical Canonical::operator*(Scalar c) const {
    Canonical out = *this;
    for (auto &s : out.summands_) {
        s.coef *= c;
    }
    return out;
}

bool Canonical::equals(const Canonical &other, double tol) const {
    if (summands_.size() != other.summands_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < summands_.size(); ++i) {
        if (!near(summands_[i].coef, other.summands_[i].coef, tol) ||
            compare(summands_[i].term, other.summands_[i].term) != 0) {
            return false;
        }
    }
    return true;
}

Canonical Canonical::drop_zeros(double tol) const {
    Canonical out;
    for (const auto &s : summands_) {
        if (std::abs(s.coef) > tol) {
            out.summands_.push_back(s);
        }
    }
    return out;
}

Canonical canonicalize_summands(std::vector<Summand> items) {
    std::stable_sort(items.begin(), items.end(),
                     [](const Summand &x, const Summand &y) { return compare(x.term, y.term) < 0; });
    Canonical out;
    for (auto &s : items) {
        if (!out.summands_.empty() && compare(out.summands_.back().term, s.term) == 0) {
            out.summands_.back().coef += s.coef;
        } else {
            out.summands_.push_back(std::move(s));
        }
    }
    return out;
}

Canonical canonicalize(const DistPtr &d) {
    std::vector<Summand> items;
    flatten(d, 1.0, items);
    return canonicalize_summands(std::move(items));
}

DistPtr to_raw(const Canonical &c) {
    std::vector<DistPtr> parts;
    parts.reserve(c.size());
    for (const auto &s : c) {
        parts.push_back(scale(s.coef, s.term));
    }
    return sum_all(parts);
}

std::vector<TermPtr> domain(const Canonical &c) {
    std::vector<TermPtr> out;
    out.reserve(c.size());
    for (const auto &s : c) {
        out.push_back(s.term);
    }
    return out;
}

Scalar weight(const Canonical &c) {
    Scalar w{0.0, 0.0};
    for (const auto &s : c) {
        w += s.coef;
    }
    return w;
}

bool is_value_distribution(const Canonical &c) {
    return std::all_of(c.begin(), c.end(), [](const Summand &s) { return is_value(s.term); });
}

std::set<std::string> free_vars(const Canonical &c) {
    std::set<std::string> out;
    for (const auto &s : c) {
        auto fv = free_vars(s.term);
        out.insert(fv.begin(), fv.end());
    }
    return out;
}

bool is_closed(const Canonical &c) {
    return std::all_of(c.begin(), c.end(), [](const Summand &s) { return is_closed(s.term); });
}

Canonical lift_constructor(Ctor kind, const std::vector<Canonical> &args, const LiftShape &shape) {
    const std::size_t n = arity(kind);
    if (args.size() != n) {
        throw ShapeError("wrong number of constructor arguments");
    }
    if (value_only(kind)) {
        for (const auto &a : args) {
            if (!is_value_distribution(a)) {
                throw ShapeError("value position received a non-value distribution");
            }
        }
    }
    std::vector<Summand> out;
    if (n == 1) {
        for (const auto &s : args[0]) {
            out.push_back({s.coef, build(kind, {s.term}, shape)});
        }
    } else {
        for (const auto &s : args[0]) {
            for (const auto &t : args[1]) {
                out.push_back({s.coef * t.coef, build(kind, {s.term, t.term}, shape)});
            }
        }
    }
    return canonicalize_summands(std::move(out));
}

DistPtr lift_raw(Ctor kind, const std::vector<DistPtr> &args, const LiftShape &shape) {
    const std::size_t n = arity(kind);
    if (args.size() != n) {
        throw ShapeError("wrong number of constructor arguments");
    }
    // Distribute over argument `pos` structurally, with `fixed` holding the
    // already-chosen pure terms of earlier positions.
    std::function<DistPtr(std::size_t, const DistPtr &, std::vector<TermPtr> &)> go;
    go = [&](std::size_t pos, const DistPtr &d, std::vector<TermPtr> &fixed) -> DistPtr {
        switch (d->kind) {
        case DistKind::Zero:
            return zero();
        case DistKind::Sum:
            return sum(go(pos, d->a, fixed), go(pos, d->b, fixed));
        case DistKind::Scale:
            return scale(d->coef, go(pos, d->a, fixed));
        case DistKind::Single:
            break;
        }
        if (value_only(kind) && !is_value(d->term)) {
            throw ShapeError("value position received a non-value term");
        }
        fixed.push_back(d->term);
        DistPtr result;
        if (pos + 1 == n) {
            result = single(build(kind, fixed, shape));
        } else {
            result = go(pos + 1, args[pos + 1], fixed);
        }
        fixed.pop_back();
        return result;
    };
    std::vector<TermPtr> fixed;
    return go(0, args[0], fixed);
}

Canonical bilinear_substitute(const Canonical &t, const std::string &x, const Canonical &v) {
    if (!is_closed(v)) {
        throw OpenValueError("bilinear substitution needs a closed value distribution");
    }
    if (!is_value_distribution(v)) {
        throw ShapeError("bilinear substitution needs a value distribution");
    }
    std::vector<Summand> out;
    for (const auto &w : v) {
        for (const auto &s : t) {
            out.push_back({w.coef * s.coef, substitute(s.term, x, w.term)});
        }
    }
    return canonicalize_summands(std::move(out));
}

}  // namespace ulc
