#include <algorithm>

#include "ulc/errors.hpp"
#include "ulc/lambdaq.hpp"

// Type reconstruction for lambda_Q. Unannotated binders get
// metavariables solved by unification. A metavariable is tagged with the
// class of types it may stand for; unsolved ones default to qbit
// (quantum) or U (classical).

namespace ulc {

namespace {

enum class Sort : std::uint8_t { Classical, Quantum };

class Unifier {
  public:
    QTypePtr fresh(Sort s) {
        sorts_.push_back(s);
        binding_.push_back(nullptr);
        return std::make_shared<const QType>(QType{.kind = QTypeKind::Meta, .meta = binding_.size() - 1});
    }

    QTypePtr resolve(QTypePtr t) const {
        while (t->kind == QTypeKind::Meta && binding_[t->meta]) {
            t = binding_[t->meta];
        }
        return t;
    }

    void unify(const QTypePtr &x, const QTypePtr &y, const std::string &where) {
        QTypePtr a = resolve(x), b = resolve(y);
        if (a->kind == QTypeKind::Meta && b->kind == QTypeKind::Meta) {
            if (a->meta == b->meta) {
                return;
            }
            if (sorts_[a->meta] != sorts_[b->meta]) {
                mismatch(a, b, where);
            }
            binding_[a->meta] = b;
            return;
        }
        if (a->kind == QTypeKind::Meta) {
            bind(a->meta, b, where);
            return;
        }
        if (b->kind == QTypeKind::Meta) {
            bind(b->meta, a, where);
            return;
        }
        if (a->kind != b->kind) {
            mismatch(a, b, where);
        }
        if (a->l) {
            unify(a->l, b->l, where);
            unify(a->r, b->r, where);
        }
    }

    // Fully substituted type with defaults for unsolved metavariables.
    QTypePtr zonk(const QTypePtr &t) const {
        QTypePtr r = resolve(t);
        if (r->kind == QTypeKind::Meta) {
            return sorts_[r->meta] == Sort::Quantum ? q_qbit() : q_unit();
        }
        if (!r->l) {
            return r;
        }
        return std::make_shared<const QType>(QType{.kind = r->kind, .l = zonk(r->l), .r = zonk(r->r)});
    }

    std::string show(const QTypePtr &t) const { return to_string(zonk_partial(t)); }

  private:
    QTypePtr zonk_partial(const QTypePtr &t) const {
        QTypePtr r = resolve(t);
        if (!r->l) {
            return r;
        }
        return std::make_shared<const QType>(
            QType{.kind = r->kind, .l = zonk_partial(r->l), .r = zonk_partial(r->r)});
    }

    bool occurs(std::size_t m, const QTypePtr &t) const {
        QTypePtr r = resolve(t);
        if (r->kind == QTypeKind::Meta) {
            return r->meta == m;
        }
        return r->l && (occurs(m, r->l) || occurs(m, r->r));
    }

    // A type fits a sort when its head is compatible; metavariables inside
    // are re-sorted as needed.
    void fit(const QTypePtr &t, Sort s, const std::string &where) {
        QTypePtr r = resolve(t);
        if (r->kind == QTypeKind::Meta) {
            if (sorts_[r->meta] != s) {
                throw QTypeError(where + ": cannot use " + show(r) + " as both a classical and a quantum type");
            }
            return;
        }
        if (s == Sort::Quantum) {
            if (r->kind == QTypeKind::Qbit) {
                return;
            }
            if (r->kind == QTypeKind::Tensor) {
                fit(r->l, s, where);
                fit(r->r, s, where);
                return;
            }
            throw QTypeError(where + ": expected a quantum type, got " + show(r));
        }
        switch (r->kind) {
        case QTypeKind::Unit:
        case QTypeKind::Bit:
            return;
        case QTypeKind::Arrow:
        case QTypeKind::Prod:
            fit(r->l, Sort::Classical, where);
            fit(r->r, Sort::Classical, where);
            return;
        case QTypeKind::Lolli:
            fit(r->l, Sort::Quantum, where);
            fit(r->r, Sort::Quantum, where);
            return;
        default:
            throw QTypeError(where + ": expected a classical type, got " + show(r));
        }
    }

    void bind(std::size_t m, const QTypePtr &t, const std::string &where) {
        if (occurs(m, t)) {
            throw QTypeError(where + ": infinite type " + show(t));
        }
        fit(t, sorts_[m], where);
        binding_[m] = t;
    }

    [[noreturn]] void mismatch(const QTypePtr &a, const QTypePtr &b, const std::string &where) const {
        throw QTypeError(where + ": type mismatch between " + show(a) + " and " + show(b));
    }

    std::vector<Sort> sorts_;
    std::vector<QTypePtr> binding_;
};

const QTypePtr *find(const QContext &ctx, const std::string &x) {
    for (auto it = ctx.rbegin(); it != ctx.rend(); ++it) {
        if (it->first == x) {
            return &it->second;
        }
    }
    return nullptr;
}

QContext without(const QContext &ctx, const std::vector<std::string> &names) {
    QContext out;
    for (const auto &b : ctx) {
        if (std::find(names.begin(), names.end(), b.first) == names.end()) {
            out.push_back(b);
        }
    }
    return out;
}

std::string names_of(const QContext &ctx) {
    std::string s;
    for (const auto &b : ctx) {
        s += (s.empty() ? "" : ", ") + b.first;
    }
    return s;
}

class Inferencer {
  public:
    explicit Inferencer(const GateTable &gates) : gates_(gates) {}

    Unifier &unifier() { return u_; }

    QTypePtr classical(const QContext &delta, const QTermPtr &t) {
        const std::string where = "in `" + to_string(t) + "`";
        switch (t->kind) {
        case QKind::Var:
            if (const QTypePtr *a = find(delta, t->name)) {
                return *a;
            }
            throw QTypeError(where + ": " + t->name + " is not a classical variable");
        case QKind::Star:
            return q_unit();
        case QKind::True:
        case QKind::False:
            return q_bit();
        case QKind::Lam: {
            QTypePtr a = annotation(t, Sort::Classical, where);
            QContext inner = without(delta, {t->name});
            inner.emplace_back(t->name, a);
            return q_arrow(a, classical(inner, t->a));
        }
        case QKind::App: {
            QTypePtr f = classical(delta, t->a);
            QTypePtr a = classical(delta, t->b);
            QTypePtr r = u_.fresh(Sort::Classical);
            u_.unify(f, q_arrow(a, r), where);
            return r;
        }
        case QKind::Pair:
            return q_prod(classical(delta, t->a), classical(delta, t->b));
        case QKind::Fst:
        case QKind::Snd: {
            QTypePtr l = u_.fresh(Sort::Classical), r = u_.fresh(Sort::Classical);
            u_.unify(classical(delta, t->a), q_prod(l, r), where);
            return t->kind == QKind::Fst ? l : r;
        }
        case QKind::If: {
            u_.unify(classical(delta, t->a), q_bit(), where);
            QTypePtr a = classical(delta, t->b);
            u_.unify(a, classical(delta, t->c), where);
            return a;
        }
        case QKind::LamQ: {
            QTypePtr a = annotation(t, Sort::Quantum, where);
            QTypePtr b = quantum(without(delta, {t->name}), {{t->name, a}}, t->a);
            return q_lolli(a, b);
        }
        case QKind::Ctl:
        case QKind::Ctl1: {
            QTypePtr a = u_.fresh(Sort::Quantum), b = u_.fresh(Sort::Quantum);
            u_.unify(classical(delta, t->a), q_lolli(a, b), where);
            return q_lolli(q_tensor(q_qbit(), a), q_tensor(q_qbit(), b));
        }
        default:
            throw QTypeError(where + ": a quantum term cannot appear in a classical judgment");
        }
    }

    QTypePtr quantum(const QContext &delta, const QContext &gamma, const QTermPtr &t) {
        const std::string where = "in `" + to_string(t) + "`";
        switch (t->kind) {
        case QKind::Var: {
            const QTypePtr *a = find(gamma, t->name);
            if (!a) {
                throw QTypeError(where + ": " + t->name + " is not a quantum variable");
            }
            if (gamma.size() != 1) {
                throw QTypeError(where + ": quantum variables " + names_of(without(gamma, {t->name})) +
                                 " are not used");
            }
            return *a;
        }
        case QKind::Tensor: {
            auto [g1, g2] = split(gamma, t->a, t->b, {}, where);
            return q_tensor(quantum(delta, g1, t->a), quantum(delta, g2, t->b));
        }
        case QKind::Gate: {
            if (!gates_.contains(t->name)) {
                throw QTypeError(where + ": unknown gate " + t->name);
            }
            u_.unify(quantum(delta, gamma, t->a), q_qbit(), where);
            return q_qbit();
        }
        case QKind::LetTensor: {
            auto [g1, g2] = split(gamma, t->a, t->b, {t->name, t->name2}, where);
            if (t->name == t->name2) {
                throw QTypeError(where + ": " + t->name + " is bound twice");
            }
            QTypePtr l = u_.fresh(Sort::Quantum), r = u_.fresh(Sort::Quantum);
            u_.unify(quantum(delta, g1, t->a), q_tensor(l, r), where);
            QContext inner = g2;
            inner.emplace_back(t->name, l);
            inner.emplace_back(t->name2, r);
            return quantum(without(delta, {t->name, t->name2}), inner, t->b);
        }
        case QKind::New: {
            if (!gamma.empty()) {
                throw QTypeError(where + ": quantum variables " + names_of(gamma) + " are not used");
            }
            u_.unify(classical(delta, t->a), q_bit(), where);
            return q_qbit();
        }
        case QKind::AppQ: {
            QTypePtr a = u_.fresh(Sort::Quantum), b = u_.fresh(Sort::Quantum);
            for (const auto &x : q_free_vars(t->a)) {
                if (find(gamma, x)) {
                    throw QTypeError(where + ": quantum variable " + x + " occurs in the function position");
                }
            }
            u_.unify(classical(delta, t->a), q_lolli(a, b), where);
            u_.unify(quantum(delta, gamma, t->b), a, where);
            return b;
        }
        default:
            throw QTypeError(where + ": a classical term cannot appear in a quantum judgment");
        }
    }

  private:
    QTypePtr annotation(const QTermPtr &t, Sort s, const std::string &where) {
        QTypePtr m = u_.fresh(s);
        if (t->annot) {
            u_.unify(m, t->annot, where);
        }
        return m;
    }

    // Linear split of gamma between s and t (minus the names t binds).
    std::pair<QContext, QContext> split(const QContext &gamma, const QTermPtr &s, const QTermPtr &t,
                                        const std::vector<std::string> &bound, const std::string &where) {
        auto fs = q_free_vars(s);
        auto ft = q_free_vars(t);
        for (const auto &b : bound) {
            ft.erase(b);
        }
        QContext g1, g2;
        for (const auto &b : gamma) {
            bool in_s = fs.contains(b.first), in_t = ft.contains(b.first);
            if (in_s && in_t) {
                throw QTypeError(where + ": quantum variable " + b.first + " is used twice");
            }
            if (!in_s && !in_t) {
                throw QTypeError(where + ": quantum variable " + b.first + " is not used");
            }
            (in_s ? g1 : g2).push_back(b);
        }
        return {g1, g2};
    }

    const GateTable &gates_;
    Unifier u_;
};

void check_context(const QContext &ctx, Sort s) {
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        bool ok = s == Sort::Quantum ? is_quantum_type(ctx[i].second) : is_classical_type(ctx[i].second);
        if (!ok) {
            throw QTypeError("variable " + ctx[i].first + " has type " + to_string(ctx[i].second) +
                             (s == Sort::Quantum ? ", which is not quantum" : ", which is not classical"));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (ctx[j].first == ctx[i].first) {
                throw QTypeError("variable " + ctx[i].first + " is declared twice");
            }
        }
    }
}

}  // namespace

QTypePtr lq_type_classical(const QContext &delta, const QTermPtr &t, const GateTable &gates) {
    check_context(delta, Sort::Classical);
    Inferencer inf(gates);
    return inf.unifier().zonk(inf.classical(delta, t));
}

QTypePtr lq_type_quantum(const QContext &delta, const QContext &gamma, const QTermPtr &t, const GateTable &gates) {
    check_context(delta, Sort::Classical);
    check_context(gamma, Sort::Quantum);
    for (const auto &b : gamma) {
        if (find(delta, b.first)) {
            throw QTypeError("variable " + b.first + " is both classical and quantum");
        }
    }
    Inferencer inf(gates);
    return inf.unifier().zonk(inf.quantum(delta, gamma, t));
}

QTyping lq_typecheck(const QContext &delta, const QContext &gamma, const QTermPtr &t, const GateTable &gates) {
    if (!gamma.empty()) {
        return {Judgment::Quantum, lq_type_quantum(delta, gamma, t, gates)};
    }
    try {
        return {Judgment::Classical, lq_type_classical(delta, t, gates)};
    } catch (const QTypeError &classical_error) {
        try {
            return {Judgment::Quantum, lq_type_quantum(delta, gamma, t, gates)};
        } catch (const QTypeError &quantum_error) {
            throw QTypeError(std::string("classical: ") + classical_error.what() +
                             "; quantum: " + quantum_error.what());
        }
    }
}

QTyping lq_program_type(const Program &p, const GateTable &gates) {
    QContext gamma;
    for (const auto &x : q_free_vars(p.term)) {
        gamma.emplace_back(x, q_qbit());
    }
    return lq_typecheck({}, gamma, p.term, gates);
}

}  // namespace ulc
