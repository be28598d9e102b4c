#pragma once

#include "ulc/syntax.hpp"

// Named terms available to the command line and the tests.

namespace ulc {

DistPtr ket_plus();   // 1/sqrt2 . tt + 1/sqrt2 . ff
DistPtr ket_minus();  // 1/sqrt2 . tt + (-1/sqrt2) . ff

TermPtr hadamard();    // lam x. if x then |+> else |->
TermPtr identity_fn(); // lam x. x
TermPtr k_tt();        // lam x. tt
TermPtr k_ff();        // lam x. ff
TermPtr negation();    // lam x. if x then ff else tt
DistPtr fact_f();      // 3/5 . (lam x. 5/6 . x) + 4/5 . (lam x. 5/8 . x)

// lam f. lam z. let (x, y) = z in
//   match x { inl z1 -> (inl z1, f y) | inr z2 -> (inr z2, y) }
// With fire_on_inr the two branches swap roles, so f acts when the
// control is ff.
TermPtr ctl_bar(bool fire_on_inr = false);

// H, I, K_tt, K_ff, N, F, plus, minus, ctl, ctl1.
const Environment &prelude();

}  // namespace ulc
