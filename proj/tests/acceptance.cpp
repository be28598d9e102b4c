// Acceptance runner: one PASS/FAIL line per criterion. Exits with 1 when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "ulc/errors.hpp"
#include "ulc/eval.hpp"
#include "ulc/lambdaq.hpp"
#include "ulc/prelude.hpp"
#include "ulc/semantics.hpp"
#include "ulc/syntax.hpp"
#include "ulc/typing.hpp"

using namespace ulc;
using ulc::test::Rng;
using ulc::test::TermGen;
using ulc::test::Ty;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Collects the first few failure details of one criterion.
class Check {
  public:
    void expect(bool ok, const std::string &what) {
        if (ok) {
            return;
        }
        if (failures_++ < 3) {
            details_ << (details_.tellp() > 0 ? "; " : "") << what;
        }
    }
    bool ok() const { return failures_ == 0; }
    std::string details() const {
        std::string d = details_.str();
        if (failures_ > 3) {
            d += "; and " + std::to_string(failures_ - 3) + " more";
        }
        return d;
    }

  private:
    std::size_t failures_ = 0;
    std::ostringstream details_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool near(Scalar a, Scalar b, double tol) { return std::abs(a - b) <= tol; }

Scalar coef(const Canonical &c, const TermPtr &t) {
    auto x = c.coefficient(t);
    return x ? *x : Scalar{0.0};
}

Canonical nf(const Canonical &d) { return normalize(d).result; }

Canonical apply_fn(const Canonical &f, const Canonical &v) { return lift_constructor(Ctor::App, {f, v}); }

TypePtr SB() { return sharp(bool_type()); }

std::string show(Scalar s) {
    std::ostringstream o;
    o << s;
    return o.str();
}

// ---------------------------------------------------------------- 1

void hadamard_evaluation(Check &c) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::pair<Scalar, Scalar>> inputs{{1.0, 0.0}, {0.0, 1.0}, {kInvSqrt2, kInvSqrt2}};
    for (const auto &[a, b] : inputs) {
        const Canonical v = canonicalize(sum(scale(a, tt()), scale(b, ff())));
        const Canonical r = nf(apply_fn(Canonical::of(hadamard()), v));
        c.expect(near(coef(r, tt()), (a + b) * kInvSqrt2, 1e-9) && near(coef(r, ff()), (a - b) * kInvSqrt2, 1e-9),
                 "H(" + show(a) + ", " + show(b) + ") = " + to_string(r));
    }
    const double s = seconds_since(t0);
    c.expect(s < 1.0, "took " + std::to_string(s) + " s");
}

// ---------------------------------------------------------------- 2

void double_hadamard(Check &c) {
    const Canonical r = nf(Canonical::of(app(hadamard(), app(hadamard(), tt()))));
    c.expect(r.size() == 2, "expected two summands, got " + to_string(r));
    c.expect(near(coef(r, tt()), 1.0, 1e-9), "tt coefficient in " + to_string(r));
    c.expect(r.contains(ff()) && near(coef(r, ff()), 0.0, 1e-9), "0.ff missing from " + to_string(r));
}

// ---------------------------------------------------------------- 3

void expect_matrix(Check &c, const std::string &name, const Matrix &m, const std::vector<std::vector<Scalar>> &e) {
    bool ok = m.size() == e.size();
    for (std::size_t i = 0; ok && i < e.size(); ++i) {
        ok = m[i].size() == e[i].size();
        for (std::size_t j = 0; ok && j < e[i].size(); ++j) {
            ok = near(m[i][j], e[i][j], 1e-7);
        }
    }
    c.expect(ok, name + " matrix differs");
}

void unitarity(Check &c) {
    const Scalar h = kInvSqrt2;
    const std::vector<std::pair<TermPtr, std::vector<std::vector<Scalar>>>> cases{
        {hadamard(), {{h, h}, {h, -h}}},
        {identity_fn(), {{1, 0}, {0, 1}}},
        {negation(), {{0, 1}, {1, 0}}},
    };
    const std::vector<std::string> names{"H", "I", "N"};
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const auto r = check_unitary_endo(Canonical::of(cases[k].first), SB(), SB(), ArrowKind::Pure);
        c.expect(r.verdict == Tri::Yes, names[k] + " is not unitary: " + r.message);
        if (r.verdict == Tri::Yes) {
            expect_matrix(c, names[k], r.matrix, cases[k].second);
        }
    }
    const auto k = check_unitary_endo(Canonical::of(k_tt()), SB(), SB(), ArrowKind::Pure);
    c.expect(k.verdict == Tri::No, "K_tt passed");
    c.expect(k.gram.size() == 2 && near(k.gram[0][1], 1.0, 1e-7), "K_tt Gram off-diagonal is not 1");
    const auto f = check_unitary_endo(canonicalize(fact_f()), SB(), SB(), ArrowKind::Unit);
    c.expect(f.verdict == Tri::Yes, "F fails at #B => #B: " + f.message);
}

// ---------------------------------------------------------------- 4

void church_numerals(Check &c) {
    const Canonical f = canonicalize(fact_f());
    for (unsigned n = 0; n <= 5; ++n) {
        const Canonical t = lift_constructor(Ctor::App, {lift_constructor(Ctor::App, {Canonical::of(church(n)), f}),
                                                         Canonical::of(tt())});
        const Canonical r = nf(t);
        const double expected = 0.6 * std::pow(5.0 / 6.0, n) + 0.8 * std::pow(5.0 / 8.0, n);
        c.expect(near(coef(r, tt()), expected, 1e-9),
                 "n=" + std::to_string(n) + ": " + to_string(r) + " vs " + std::to_string(expected));
        if (n <= 3) {
            const Tri v = realizes(t, SB());
            c.expect(v == (n == 1 ? Tri::Yes : Tri::No),
                     "realizes(church " + std::to_string(n) + " F tt, #B) = " + to_string(v));
        }
    }
    const auto pin = [&](unsigned n, double v) {
        const Canonical t =
            lift_constructor(Ctor::App, {lift_constructor(Ctor::App, {Canonical::of(church(n)), f}), Canonical::of(tt())});
        c.expect(near(coef(nf(t), tt()), v, 1e-8), "pinned value for n=" + std::to_string(n));
    };
    pin(0, 1.4);
    pin(1, 1.0);
    pin(2, 0.72916667);
}

// ---------------------------------------------------------------- 5

bool uses_rule(const Derivation &d, Rule r) {
    if (d.rule == r) {
        return true;
    }
    for (const auto &p : d.premises) {
        if (uses_rule(p, r)) {
            return true;
        }
    }
    return false;
}

void typing(Check &c) {
    const auto h = try_infer({}, single(hadamard()), pure_arrow(SB(), SB()));
    c.expect(h.has_value(), "no derivation of H : #B -> #B");
    if (h) {
        c.expect(uses_rule(*h, Rule::UnitaryMatch), "H derivation does not use UnitaryMatch");
        c.expect(!uses_rule(*h, Rule::Realize), "H derivation falls back to Realize");
        c.expect(check_derivation(*h).ok, "H derivation does not check");
    }
    const TypePtr pure = pure_arrow(pure_arrow(SB(), SB()), pure_arrow(SB(), SB()));
    const TypePtr unit = unit_arrow(unit_arrow(SB(), SB()), unit_arrow(SB(), SB()));
    for (unsigned n = 0; n <= 3; ++n) {
        const auto d = try_infer({}, single(church(n)), pure);
        c.expect(d && check_derivation(*d).ok, "church " + std::to_string(n) + " at (#B->#B)->(#B->#B)");
    }
    for (unsigned n : {0U, 2U}) {
        c.expect(!try_infer({}, single(church(n)), unit),
                 "church " + std::to_string(n) + " accepted at (#B=>#B)=>(#B=>#B)");
    }
    const auto one = try_infer({}, single(church(1)), unit);
    c.expect(one && check_derivation(*one).ok, "church 1 rejected at (#B=>#B)=>(#B=>#B)");
}

// ---------------------------------------------------------------- 6

void orthogonality(Check &c) {
    for (const char *src : {"|- <tt _|_ ff> : B", "|- <plus _|_ minus> : #B",
                            "|- <x:#U | x ; plus _|_ y:#U | y ; minus> : #B"}) {
        const auto r = check_orthogonality(parse_orthogonality(src, &prelude()));
        c.expect(r.verdict == Tri::Yes, std::string(src) + ": " + to_string(r.verdict) + " " + r.message);
    }
}

// ---------------------------------------------------------------- 7

void translation(Check &c) {
    const Scalar a{0.6, 0.0};
    const Scalar b{0.0, 0.8};
    Program p;
    p.state.amplitudes = {a, 0, 0, b};
    p.wires = {{"x", 1}, {"y", 2}};
    p.term = parse_qterm("x (x) y");
    const Canonical d = translate_program(p);
    const Canonical e = canonicalize(sum(scale(a, pair(tt(), tt())), scale(b, pair(ff(), ff()))));
    c.expect(d.equals(e, 0.0), to_string(d));
}

// ---------------------------------------------------------------- 8

Program program(std::vector<Scalar> amps, std::map<std::string, std::size_t> wires, const std::string &term) {
    Program p;
    p.state.amplitudes = std::move(amps);
    p.wires = std::move(wires);
    p.term = parse_qterm(term);
    validate_program(p);
    return p;
}

void adequacy(Check &c) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Case {
        const char *rule;
        std::vector<Scalar> amps;
        std::map<std::string, std::size_t> wires;
        const char *term;
    };
    const std::vector<Case> cases{
        {"beta", {1}, {}, "(lam b. if b then ff else tt) tt"},
        {"quantum beta", {kInvSqrt2, kInvSqrt2}, {{"x", 1}}, "(lamq q. H(q)) @ x"},
        {"first projection", {1}, {}, "fst (tt, ff)"},
        {"second projection", {1}, {}, "snd (tt, ff)"},
        {"if true", {1}, {}, "if tt then ff else tt"},
        {"if false", {1}, {}, "if ff then ff else tt"},
        {"let tensor", {0, 0.6, 0.8, 0}, {{"x", 1}, {"y", 2}}, "let a (x) b = x (x) y in b (x) a"},
        {"new true", {1}, {}, "new(tt)"},
        {"new false", {1}, {}, "new(ff)"},
        {"gate", {0.6, Scalar{0, 0.8}}, {{"x", 1}}, "H(x)"},
        {"bell", {1}, {}, "ctl1(lamq q. X(q)) @ (H(new(tt)) (x) new(tt))"},
    };
    for (const auto &k : cases) {
        try {
            const auto r = adequacy_check(program(k.amps, k.wires, k.term));
            c.expect(r.finished, std::string(k.rule) + " did not finish");
        } catch (const Error &e) {
            c.expect(false, std::string(k.rule) + ": " + e.what());
        }
    }
    const Program bell = program({1}, {}, "ctl1(lamq q. X(q)) @ (H(new(tt)) (x) new(tt))");
    const Canonical fin = nf(translate_program(lq_run(bell).program));
    const Canonical expected =
        canonicalize(sum(scale(kInvSqrt2, pair(tt(), tt())), scale(kInvSqrt2, pair(ff(), ff()))));
    c.expect(fin.equals(expected, 1e-9), "Bell translation is " + to_string(fin));
    const double s = seconds_since(t0);
    c.expect(s < 10.0, "hand-built suite took " + std::to_string(s) + " s");

    Rng rng(801);
    for (int i = 0; i < 500; ++i) {
        const Program p = test::random_program(rng);
        try {
            const auto r = adequacy_check(p);
            c.expect(r.finished, to_string(p.term) + " did not finish");
        } catch (const Error &e) {
            c.expect(false, to_string(p.term) + ": " + e.what());
        }
    }
}

// ---------------------------------------------------------------- 9

std::vector<Canonical> successors(const Canonical &d, const std::vector<Scalar> &alphas) {
    std::vector<Canonical> out;
    for (const auto &s : d) {
        if (!is_reducible(s.term)) {
            continue;
        }
        std::vector<Scalar> tries = alphas;
        tries.push_back(s.coef);
        for (Scalar a : tries) {
            out.push_back(step_with_decomposition(d, s.term, a));
        }
    }
    return out;
}

bool reaches(const Canonical &from, const Canonical &to, const std::vector<Scalar> &alphas, int depth) {
    if (from.equals(to, 1e-9)) {
        return true;
    }
    if (depth == 0) {
        return false;
    }
    for (const auto &n : successors(from, alphas)) {
        if (reaches(n, to, alphas, depth - 1)) {
            return true;
        }
    }
    return false;
}

bool joinable(const Canonical &u1, const Canonical &u2, const std::vector<Scalar> &alphas) {
    if (reaches(u1, u2, alphas, 2) || reaches(u2, u1, alphas, 2)) {
        return true;
    }
    for (const auto &a : successors(u1, alphas)) {
        for (const auto &b : successors(u2, alphas)) {
            if (a.equals(b, 1e-9)) {
                return true;
            }
        }
    }
    return false;
}

void properties(Check &c) {
    Rng rng(901);

    // Congruence axioms under canonicalize.
    for (int i = 0; i < 200; ++i) {
        const DistPtr d1 = test::random_raw_dist(rng, 3, {"x", "y"});
        const DistPtr d2 = test::random_raw_dist(rng, 3, {"x", "y"});
        const DistPtr d3 = test::random_raw_dist(rng, 3, {"x", "y"});
        const Scalar a = rng.scalar();
        const Scalar b = rng.scalar();
        const Canonical c1 = canonicalize(d1);
        const double tol = 1e-12;
        c.expect(canonicalize(sum(d1, zero())).equals(c1, tol) && canonicalize(scale(1.0, d1)).equals(c1, tol) &&
                     canonicalize(scale(a, scale(b, d1))).equals(canonicalize(scale(a * b, d1)), tol) &&
                     canonicalize(sum(d1, d2)).equals(canonicalize(sum(d2, d1)), tol) &&
                     canonicalize(sum(sum(d1, d2), d3)).equals(canonicalize(sum(d1, sum(d2, d3))), tol) &&
                     canonicalize(scale(a + b, d1)).equals(canonicalize(sum(scale(a, d1), scale(b, d1))), tol) &&
                     canonicalize(scale(a, sum(d1, d2)))
                         .equals(canonicalize(sum(scale(a, d1), scale(a, d2))), tol),
                 "congruence axiom fails on " + to_string(d1));
    }

    // Linearity of evaluation.
    {
        TermGen gen(rng);
        for (int i = 0; i < 200; ++i) {
            const Ty ty = static_cast<Ty>(rng.below(3));
            const Canonical d1 = gen.closed(ty, 3);
            const Canonical d2 = gen.closed(ty, 3);
            const Scalar a = rng.coefficient();
            const Canonical n1 = nf(d1);
            const Canonical n2 = nf(d2);
            c.expect(nf(d1 * a).equals(n1 * a, 1e-9) && nf(d1 + d2).equals(n1 + n2, 1e-9),
                     "linearity fails on " + to_string(d1));
        }
    }

    // Weak diamond through step_with_decomposition.
    {
        TermGen gen(rng);
        int tested = 0;
        for (int i = 0; i < 400 && tested < 150; ++i) {
            const Canonical d = gen.closed(static_cast<Ty>(rng.below(3)), 3);
            std::vector<TermPtr> redexes;
            for (const auto &s : d) {
                if (is_reducible(s.term)) {
                    redexes.push_back(s.term);
                }
            }
            if (redexes.empty()) {
                continue;
            }
            const TermPtr s1 = rng.pick(redexes);
            const TermPtr s2 = rng.pick(redexes);
            const Scalar a1 = rng.coin() ? *d.coefficient(s1) : rng.coefficient();
            const Scalar a2 = rng.coin() ? *d.coefficient(s2) : rng.coefficient();
            const Canonical u1 = step_with_decomposition(d, s1, a1);
            const Canonical u2 = step_with_decomposition(d, s2, a2);
            c.expect(joinable(u1, u2, {a1, a2, a1 - a2, a2 - a1}), "weak diamond fails on " + to_string(d));
            ++tested;
        }
        c.expect(tested >= 100, "only " + std::to_string(tested) + " diamond cases");
    }

    // Scheduler independence on 1000 terminating terms.
    {
        TermGen gen(rng);
        for (int i = 0; i < 1000; ++i) {
            const Canonical d = gen.closed(static_cast<Ty>(rng.below(3)), 3);
            const EvalOutcome x = normalize(d);
            const EvalOutcome y = normalize_with(d, kDefaultFuel, [&rng](const std::vector<std::size_t> &idx) {
                return idx[static_cast<std::size_t>(rng.below(static_cast<int>(idx.size())))];
            });
            c.expect(x.normal && y.normal && x.result.equals(y.result, 1e-9),
                     "schedulers disagree on " + to_string(d));
        }
    }

    // Polarization and inner products through the constructors.
    {
        const Scalar i{0.0, 1.0};
        const TypePtr b = bool_type();
        for (int k = 0; k < 200; ++k) {
            const TypePtr t = rng.coin() ? b : otimes(b, b);
            const Canonical v = test::random_vector(rng, t);
            const Canonical w = test::random_vector(rng, t);
            auto sq = [](const Canonical &x) { return norm(x) * norm(x); };
            const Scalar rhs = 0.25 * (sq(v + w) - sq(v + w * Scalar(-1.0)) - i * sq(v + w * i) + i * sq(v + w * (-i)));
            c.expect(near(inner_product(v, w), rhs, 1e-7), "polarization fails on " + to_string(v));

            const Canonical v1 = test::random_vector(rng, b);
            const Canonical v2 = test::random_vector(rng, b);
            const Canonical w1 = test::random_vector(rng, b);
            const Canonical w2 = test::random_vector(rng, b);
            auto inl_ = [](const Canonical &x) { return lift_constructor(Ctor::Inl, {x}); };
            auto inr_ = [](const Canonical &x) { return lift_constructor(Ctor::Inr, {x}); };
            const Scalar pairs =
                inner_product(lift_constructor(Ctor::Pair, {v1, w1}), lift_constructor(Ctor::Pair, {v2, w2}));
            c.expect(near(inner_product(inl_(v1), inl_(v2)), inner_product(v1, v2), 1e-7) &&
                         near(inner_product(inr_(v1), inr_(v2)), inner_product(v1, v2), 1e-7) &&
                         near(inner_product(inl_(v1), inr_(v2)), 0.0, 1e-7) &&
                         near(pairs, inner_product(v1, v2) * inner_product(w1, w2), 1e-7),
                     "constructor inner product fails on " + to_string(v1));
        }
    }

    // Translated types: classical ones are pure, quantum ones are sharp.
    {
        std::vector<QTypePtr> types{q_unit(), q_bit(), q_qbit(), q_lolli(q_qbit(), q_qbit()),
                                    q_arrow(q_bit(), q_prod(q_bit(), q_unit()))};
        for (int i = 0; i < 300; ++i) {
            types.push_back(lq_program_type(test::random_program(rng)).type);
        }
        for (const auto &a : types) {
            const TypePtr t = translate_type(a);
            if (is_quantum_type(a)) {
                c.expect(type_equiv(sharp(t), t), "sharp of " + to_string(t));
            } else {
                c.expect(type_equiv(flat(t), t), "flat of " + to_string(t));
            }
        }
    }

    // Derivations agree with the semantics.
    {
        std::size_t accepted = 0;
        for (const auto &k : test::typing_corpus(rng, 400)) {
            const auto d = try_infer(k.context, k.term, k.type);
            if (!d) {
                continue;
            }
            ++accepted;
            const auto chk = check_derivation(*d);
            c.expect(chk.ok, "derivation does not check: " + chk.diagnostic);
            const auto s = validate_semantically(d->conclusion);
            c.expect(s.verdict == Tri::Yes, to_string(d->conclusion) + ": " + to_string(s.verdict));
        }
        c.expect(accepted >= 200, "only " + std::to_string(accepted) + " derivations");
    }
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Check &)>>> criteria{
        {"Hadamard evaluation", hadamard_evaluation},
        {"double Hadamard keeps 0.ff", double_hadamard},
        {"unitarity checks", unitarity},
        {"Church numerals with F", church_numerals},
        {"typing", typing},
        {"orthogonality", orthogonality},
        {"lambda_Q translation", translation},
        {"adequacy", adequacy},
        {"property suites", properties},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(c);
        } catch (const std::exception &e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double s = seconds_since(t0);
        std::ostringstream line;
        line << (c.ok() ? "PASS" : "FAIL") << ' ' << (i + 1) << ' ' << criteria[i].first << " (" << s << " s)";
        if (!c.ok()) {
            line << ": " << c.details();
            ++failed;
        }
        std::cout << line.str() << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
