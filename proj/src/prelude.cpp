#include "ulc/prelude.hpp"

#include <cmath>

namespace ulc {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

DistPtr ket_plus() { return sum(scale(kInvSqrt2, tt()), scale(kInvSqrt2, ff())); }

DistPtr ket_minus() { return sum(scale(kInvSqrt2, tt()), scale(-kInvSqrt2, ff())); }

TermPtr hadamard() { return lam("x", single(if_then_else(var("x"), ket_plus(), ket_minus()))); }

TermPtr identity_fn() { return lam("x", single(var("x"))); }

TermPtr k_tt() { return lam("x", single(tt())); }

TermPtr k_ff() { return lam("x", single(ff())); }

TermPtr negation() { return lam("x", single(if_then_else(var("x"), single(ff()), single(tt())))); }

DistPtr fact_f() {
    TermPtr a = lam("x", scale(5.0 / 6.0, var("x")));
    TermPtr b = lam("x", scale(5.0 / 8.0, var("x")));
    return sum(scale(3.0 / 5.0, a), scale(4.0 / 5.0, b));
}

TermPtr ctl_bar(bool fire_on_inr) {
    TermPtr fy = app(var("f"), var("y"));
    TermPtr left = pair_term(inl(var("z1")), fire_on_inr ? var("y") : fy);
    TermPtr right = pair_term(inr(var("z2")), fire_on_inr ? fy : var("y"));
    TermPtr body = let_pair("x", "y", var("z"), single(match(var("x"), "z1", single(left), "z2", single(right))));
    return lam("f", single(lam("z", single(body))));
}

const Environment &prelude() {
    static const Environment env = [] {
        Environment e;
        e["H"] = single(hadamard());
        e["I"] = single(identity_fn());
        e["K_tt"] = single(k_tt());
        e["K_ff"] = single(k_ff());
        e["N"] = single(negation());
        e["F"] = fact_f();
        e["plus"] = ket_plus();
        e["minus"] = ket_minus();
        e["ctl"] = single(ctl_bar(false));
        e["ctl1"] = single(ctl_bar(true));
        return e;
    }();
    return env;
}

}  // namespace ulc
