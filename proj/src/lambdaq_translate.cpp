#include "ulc/errors.hpp"
#include "ulc/lambdaq.hpp"
#include "ulc/prelude.hpp"
#include "ulc/syntax.hpp"
#include "ulc/typing.hpp"

namespace ulc {

TypePtr translate_type(const QTypePtr &a) {
    switch (a->kind) {
    case QTypeKind::Unit:
        return unit_type();
    case QTypeKind::Bit:
        return bool_type();
    case QTypeKind::Qbit:
        return sharp(bool_type());
    case QTypeKind::Arrow:
        return pure_arrow(translate_type(a->l), translate_type(a->r));
    case QTypeKind::Lolli:
        return pure_arrow(unit_type(), unit_arrow(translate_type(a->l), translate_type(a->r)));
    case QTypeKind::Prod:
        return prod_type(translate_type(a->l), translate_type(a->r));
    case QTypeKind::Tensor:
        return otimes(translate_type(a->l), translate_type(a->r));
    case QTypeKind::Meta:
        break;
    }
    throw DomainError("cannot translate an unresolved type");
}

TermPtr gate_term(const Gate &g) {
    DistPtr left = sum(scale(g[0][0], inl(var("x1"))), scale(g[1][0], inr(var("x1"))));
    DistPtr right = sum(scale(g[0][1], inl(var("x2"))), scale(g[1][1], inr(var("x2"))));
    return lam("x", single(match(var("x"), "x1", left, "x2", right)));
}

TermPtr translate_term(const QTermPtr &t, const GateTable &gates) {
    auto tr = [&gates](const QTermPtr &s) { return translate_term(s, gates); };
    switch (t->kind) {
    case QKind::Var:
        return var(t->name);
    case QKind::Star:
        return void_term();
    case QKind::True:
        return tt();
    case QKind::False:
        return ff();
    case QKind::Lam:
        return lam(t->name, single(tr(t->a)));
    case QKind::App:
        return app(tr(t->a), tr(t->b));
    case QKind::Pair:
    case QKind::Tensor:
        return pair_term(tr(t->a), tr(t->b));
    case QKind::Fst:
    case QKind::Snd:
        return let_pair("p1", "p2", tr(t->a), single(var(t->kind == QKind::Fst ? "p1" : "p2")));
    case QKind::If:
        return if_then_else(tr(t->a), single(tr(t->b)), single(tr(t->c)));
    case QKind::LetTensor:
        return let_pair(t->name, t->name2, tr(t->a), single(tr(t->b)));
    case QKind::New:
        return tr(t->a);
    case QKind::Gate:
        return app(gate_term(gates.at(t->name)), tr(t->a));
    case QKind::LamQ: {
        auto avoid = q_free_vars(t->a);
        avoid.insert(t->name);
        return lam(fresh_name("z", avoid), single(lam(t->name, single(tr(t->a)))));
    }
    case QKind::AppQ:
        return app(app(tr(t->a), void_term()), tr(t->b));
    case QKind::Ctl:
    case QKind::Ctl1: {
        // lam z. ctl (f ()), with f evaluated first when it is not yet a
        // value: (lam f. lam z. ctl (f ())) [[t]].
        TermPtr control = ctl_bar(t->kind == QKind::Ctl1);
        TermPtr body = tr(t->a);
        auto avoid = free_vars(body);
        std::string z = fresh_name("z", avoid);
        if (is_qvalue(t->a)) {
            return lam(z, single(app(control, app(body, void_term()))));
        }
        return app(lam("f", single(lam(z, single(app(control, app(var("f"), void_term())))))), body);
    }
    }
    throw DomainError("unknown lambda_Q term");
}

Canonical translate_program(const Program &p, const GateTable &gates) {
    TermPtr base = translate_term(p.term, gates);
    const std::size_t n = p.state.qubits();
    std::vector<Summand> items;
    for (std::size_t i = 0; i < p.state.amplitudes.size(); ++i) {
        Scalar amp = p.state.amplitudes[i];
        if (amp == Scalar{0.0, 0.0}) {
            continue;
        }
        TermPtr t = base;
        for (const auto &[x, w] : p.wires) {
            bool one = (i >> (n - w)) & 1U;
            t = substitute(t, x, one ? ff() : tt());
        }
        items.push_back(Summand{amp, t});
    }
    return canonicalize_summands(std::move(items));
}

namespace {

Canonical normal_form_of(const Program &p, const GateTable &gates, const AdequacyOptions &options,
                         std::size_t index) {
    EvalOutcome out = normalize(translate_program(p, gates), options.eval_fuel);
    if (!out.normal) {
        throw AdequacyViolation("step " + std::to_string(index) + ": the translation did not normalize within " +
                                std::to_string(options.eval_fuel) + " steps");
    }
    return out.result.drop_zeros(options.tolerance);
}

}  // namespace

AdequacyReport adequacy_check(const Program &p, const GateTable &gates, const AdequacyOptions &options) {
    const GateTable &tgates = options.translation_gates ? *options.translation_gates : gates;
    AdequacyReport report;

    try {
        QTyping typing = lq_program_type(p, gates);
        Context ctx;
        for (const auto &x : q_free_vars(p.term)) {
            ctx.push_back(Binding{x, sharp(bool_type())});
        }
        TypePtr goal = translate_type(typing.type);
        std::string failure;
        auto d = try_infer(ctx, single(translate_term(p.term, tgates)), goal, options.eval_fuel, &failure);
        if (d) {
            report.typeable = Tri::Yes;
            report.typing_message = "derived " + to_string(ctx) + " |- [[t]] : " + to_string(goal);
        } else {
            report.typing_message = "no derivation of [[t]] : " + to_string(goal) + " found: " + failure;
        }
    } catch (const QTypeError &e) {
        report.typing_message = std::string("program is not typeable: ") + e.what();
    }

    Program cur = p;
    Canonical before = normal_form_of(cur, tgates, options, 0);
    for (std::size_t k = 0; k < options.lq_fuel; ++k) {
        auto next = lq_step(cur, gates);
        if (!next) {
            report.finished = true;
            break;
        }
        Canonical after = normal_form_of(*next, tgates, options, k + 1);
        AdequacyStep step{k, to_string(before), to_string(after)};
        if (!before.equals(after, options.tolerance)) {
            throw AdequacyViolation("step " + std::to_string(k) + " (`" + to_string(cur.term) + "` to `" +
                                    to_string(next->term) + "`) changes the normal form of the translation from " +
                                    step.before + " to " + step.after);
        }
        report.steps.push_back(std::move(step));
        cur = std::move(*next);
        before = std::move(after);
    }
    if (!report.finished) {
        report.finished = is_qvalue(cur.term);
    }
    return report;
}

}  // namespace ulc
