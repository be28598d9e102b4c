#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "ulc/distribution.hpp"
#include "ulc/errors.hpp"
#include "ulc/prelude.hpp"
#include "ulc/syntax.hpp"

using namespace ulc;
using ulc::test::Rng;

namespace {

constexpr double kExact = 1e-12;

// Remainders r with d == alpha.t + r, or empty when t is not in dom(d).
std::vector<Canonical> remainders(const Canonical &d, Scalar alpha, const TermPtr &t) {
    auto c = d.coefficient(t);
    if (!c) {
        return {};
    }
    std::vector<Summand> keep;
    std::vector<Summand> drop;
    for (const auto &s : d) {
        if (alpha_equal(s.term, t)) {
            keep.push_back(Summand{s.coef - alpha, s.term});
        } else {
            keep.push_back(s);
            drop.push_back(s);
        }
    }
    std::vector<Canonical> out{canonicalize_summands(keep)};
    if (std::abs(*c - alpha) < kExact) {
        out.push_back(canonicalize_summands(drop));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- canonicalize

TEST(Canonicalize, ZeroSummandIsKept) {
    TermPtr t1 = var("t1");
    TermPtr t2 = var("t2");
    Canonical c = canonicalize(sum(scale(3.0, t1), scale(0.0, t2)));
    ASSERT_EQ(c.size(), 2U);
    EXPECT_EQ(*c.coefficient(t1), Scalar(3.0));
    EXPECT_EQ(*c.coefficient(t2), Scalar(0.0));
    EXPECT_FALSE(c == canonicalize(scale(3.0, t1)));
}

TEST(Canonicalize, OneTimesTerm) {
    Canonical c = canonicalize(scale(1.0, tt()));
    ASSERT_EQ(c.size(), 1U);
    EXPECT_EQ(c.summands()[0].coef, Scalar(1.0));
    EXPECT_TRUE(alpha_equal(c.summands()[0].term, tt()));
}

TEST(Canonicalize, CancellationLeavesZeroCoefficients) {
    TermPtr t1 = var("t1");
    TermPtr t2 = var("t2");
    DistPtr left = sum(single(t1), scale(-3.0, t2));
    DistPtr right = sum(scale(-1.0, t1), scale(3.0, t2));
    Canonical c = canonicalize(sum(left, right));
    ASSERT_EQ(c.size(), 2U);
    EXPECT_EQ(*c.coefficient(t1), Scalar(0.0));
    EXPECT_EQ(*c.coefficient(t2), Scalar(0.0));
    EXPECT_FALSE(c.empty());
}

TEST(Canonicalize, Idempotent) {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        Canonical c = canonicalize(ulc::test::random_raw_dist(rng, 3, {"x", "y"}));
        EXPECT_TRUE(canonicalize(to_raw(c)).equals(c, 0.0));
    }
}

TEST(Canonicalize, MergesOnlyAlphaEqualTerms) {
    Canonical c = canonicalize(sum(single(lam("x", single(var("x")))), single(lam("y", single(var("y"))))));
    ASSERT_EQ(c.size(), 1U);
    EXPECT_EQ(c.summands()[0].coef, Scalar(2.0));
    Canonical close = canonicalize(sum(scale(1.0, var("a")), scale(1.0 + 1e-12, var("b"))));
    EXPECT_EQ(close.size(), 2U);
}

// ---------------------------------------------------------------- alpha, domain, weight

TEST(AlphaEqual, RenamingBinders) {
    EXPECT_TRUE(alpha_equal(lam("x", single(var("x"))), lam("y", single(var("y")))));
    TermPtr t = app(hadamard(), tt());
    EXPECT_TRUE(alpha_equal(t, t));
}

TEST(AlphaEqual, SumsUnderBindersAreOrdered) {
    DistPtr s1 = single(var("s1"));
    DistPtr s2 = single(var("s2"));
    EXPECT_FALSE(alpha_equal(lam("x", sum(s1, s2)), lam("x", sum(s2, s1))));
    // Top-level sums commute.
    EXPECT_TRUE(canonicalize(sum(s1, s2)) == canonicalize(sum(s2, s1)));
}

TEST(AlphaEqual, FreeVariablesAreNotRenamed) {
    EXPECT_FALSE(alpha_equal(var("x"), var("y")));
    EXPECT_FALSE(alpha_equal(lam("x", single(var("y"))), lam("x", single(var("z")))));
}

TEST(Domain, IncludesZeroCoefficients) {
    Canonical c = canonicalize(sum(scale(3.0, var("t1")), scale(0.0, var("t2"))));
    auto d = domain(c);
    ASSERT_EQ(d.size(), 2U);
    EXPECT_TRUE(domain(Canonical{}).empty());
    Scalar alpha{0.3, -0.2};
    auto single_dom = domain(Canonical::of(var("t"), alpha));
    ASSERT_EQ(single_dom.size(), 1U);
    EXPECT_TRUE(alpha_equal(single_dom[0], var("t")));
}

TEST(Weight, Examples) {
    EXPECT_EQ(weight(canonicalize(sum(scale(0.5, var("t1")), scale(0.5, var("t2"))))), Scalar(1.0));
    EXPECT_EQ(weight(Canonical{}), Scalar(0.0));
    EXPECT_EQ(weight(canonicalize(sum(scale(7.0, var("t")), scale(-6.0, var("u"))))), Scalar(1.0));
}

// ---------------------------------------------------------------- lifting

TEST(LiftConstructor, PairDistributesOverBothSides) {
    Scalar a{0.6, 0.0};
    Scalar b{0.0, 0.8};
    Canonical v = canonicalize(sum(scale(a, tt()), scale(b, ff())));
    Canonical w = Canonical::of(void_term());
    Canonical p = lift_constructor(Ctor::Pair, {v, w});
    Canonical expected = canonicalize(sum(scale(a, pair(tt(), void_term())), scale(b, pair(ff(), void_term()))));
    EXPECT_TRUE(p == expected);
}

TEST(LiftConstructor, ApplicationToZero) {
    Canonical r = lift_constructor(Ctor::App, {Canonical::of(hadamard()), Canonical{}});
    EXPECT_TRUE(r.empty());
}

TEST(LiftConstructor, MatchDistributesOverScrutinee) {
    LiftShape shape;
    shape.h1 = "x1";
    shape.h2 = "x2";
    shape.body1 = abstract(single(var("x1")), {"x1"});
    shape.body2 = abstract(single(tt()), {"x2"});
    Scalar g1{2.0, 0.0};
    Scalar g2{-1.0, 0.5};
    Canonical scrut = canonicalize(sum(scale(g1, var("t1")), scale(g2, var("t2"))));
    Canonical r = lift_constructor(Ctor::Match, {scrut}, shape);
    auto m = [](const std::string &t) { return match(var(t), "x1", single(var("x1")), "x2", single(tt())); };
    Canonical expected = canonicalize(sum(scale(g1, m("t1")), scale(g2, m("t2"))));
    EXPECT_TRUE(r == expected);
}

TEST(LiftConstructor, ValuePositionsRejectNonValues) {
    Canonical redex = Canonical::of(app(identity_fn(), tt()));
    EXPECT_THROW(lift_constructor(Ctor::Inl, {redex}), ShapeError);
    EXPECT_THROW(lift_constructor(Ctor::Pair, {redex, Canonical::of(tt())}), ShapeError);
    EXPECT_THROW(pair(app(identity_fn(), tt()), tt()), ShapeError);
}

// ---------------------------------------------------------------- substitution

TEST(PureSubstitute, Examples) {
    EXPECT_TRUE(alpha_equal(pure_substitute(single(var("x")), "x", tt()), single(tt())));
    EXPECT_TRUE(alpha_equal(pure_substitute(single(lam("y", single(var("x")))), "x", tt()),
                            single(lam("y", single(tt())))));
    DistPtr s1 = single(app(var("x"), var("y")));
    DistPtr s2 = scale(2.0, pair(var("x"), void_term()));
    TermPtr w = lam("z", single(var("z")));
    EXPECT_TRUE(alpha_equal(pure_substitute(sum(s1, s2), "x", w),
                            sum(pure_substitute(s1, "x", w), pure_substitute(s2, "x", w))));
}

TEST(PureSubstitute, OpenValueIsNotCaptured) {
    // (lam y. x)[x := y] must not bind the substituted y.
    DistPtr r = pure_substitute(single(lam("y", single(var("x")))), "x", var("y"));
    EXPECT_FALSE(alpha_equal(r, single(lam("y", single(var("y"))))));
    EXPECT_TRUE(occurs_free("y", r));
}

TEST(PureSubstitute, SubstitutionLemma) {
    Rng rng(12);
    for (int i = 0; i < 300; ++i) {
        DistPtr t = ulc::test::random_raw_dist(rng, 3, {"x", "y", "z"});
        TermPtr v = ulc::test::random_raw_value(rng, 2, {"y", "z"});
        TermPtr w = ulc::test::random_raw_value(rng, 2, {"z"});
        DistPtr lhs = pure_substitute(pure_substitute(t, "x", v), "y", w);
        DistPtr rhs = pure_substitute(pure_substitute(t, "y", w), "x", substitute(v, "y", w));
        EXPECT_TRUE(alpha_equal(lhs, rhs)) << to_string(t);
    }
}

TEST(BilinearSubstitute, Examples) {
    Scalar a{0.6, 0.0};
    Scalar b{0.0, 0.8};
    Canonical v = canonicalize(sum(scale(a, tt()), scale(b, ff())));
    EXPECT_TRUE(bilinear_substitute(Canonical::of(var("x")), "x", v) == v);

    Canonical half = canonicalize(sum(scale(0.5, tt()), scale(0.5, ff())));
    Canonical r = bilinear_substitute(Canonical::of(tt()), "x", half);
    ASSERT_EQ(r.size(), 1U);
    EXPECT_NEAR(std::abs(*r.coefficient(tt()) - Scalar(1.0)), 0.0, kExact);

    // (x, x)<x := a.tt + b.ff> = a.(tt, tt) + b.(ff, ff), not the tensor square.
    Canonical dup = bilinear_substitute(Canonical::of(pair(var("x"), var("x"))), "x", v);
    Canonical expected = canonicalize(sum(scale(a, pair(tt(), tt())), scale(b, pair(ff(), ff()))));
    EXPECT_TRUE(dup == expected);
    Canonical square = lift_constructor(Ctor::Pair, {v, v});
    EXPECT_FALSE(dup == square);
}

TEST(BilinearSubstitute, WeightWhenVariableIsAbsent) {
    Canonical t = canonicalize(sum(scale(2.0, tt()), single(app(hadamard(), ff()))));
    Canonical v = canonicalize(sum(scale(Scalar(0.25, 1.0), tt()), scale(3.0, ff())));
    EXPECT_TRUE(bilinear_substitute(t, "x", v).equals(t * weight(v), kExact));
}

TEST(BilinearSubstitute, OpenValueRejected) {
    EXPECT_THROW(bilinear_substitute(Canonical::of(var("x")), "x", Canonical::of(var("y"))), OpenValueError);
}

// ---------------------------------------------------------------- properties

TEST(CongruenceAxioms, HoldUnderCanonicalize) {
    Rng rng(13);
    auto rd = [&rng] { return ulc::test::random_raw_dist(rng, 3, {"x", "y"}); };
    for (int i = 0; i < 300; ++i) {
        DistPtr d1 = rd();
        DistPtr d2 = rd();
        DistPtr d3 = rd();
        Scalar a = rng.scalar();
        Scalar b = rng.scalar();
        Canonical c1 = canonicalize(d1);
        EXPECT_TRUE(canonicalize(sum(d1, zero())).equals(c1, kExact));
        EXPECT_TRUE(canonicalize(scale(1.0, d1)).equals(c1, kExact));
        EXPECT_TRUE(canonicalize(scale(a, scale(b, d1))).equals(canonicalize(scale(a * b, d1)), kExact));
        EXPECT_TRUE(canonicalize(sum(d1, d2)).equals(canonicalize(sum(d2, d1)), kExact));
        EXPECT_TRUE(canonicalize(sum(sum(d1, d2), d3)).equals(canonicalize(sum(d1, sum(d2, d3))), kExact));
        EXPECT_TRUE(canonicalize(scale(a + b, d1)).equals(canonicalize(sum(scale(a, d1), scale(b, d1))), kExact));
        EXPECT_TRUE(canonicalize(scale(a, sum(d1, d2))).equals(canonicalize(sum(scale(a, d1), scale(a, d2))), kExact));
    }
}

TEST(CongruenceAxioms, ZeroTimesTermIsNotZero) {
    Rng rng(14);
    for (int i = 0; i < 100; ++i) {
        TermPtr t = ulc::test::random_raw_term(rng, 3, {"x"});
        Canonical c = canonicalize(scale(0.0, t));
        ASSERT_EQ(c.size(), 1U);
        EXPECT_TRUE(alpha_equal(domain(c)[0], t));
        EXPECT_FALSE(c == Canonical{});
    }
}

TEST(WeightAndDomain, AreMorphisms) {
    Rng rng(15);
    for (int i = 0; i < 200; ++i) {
        Canonical a = canonicalize(ulc::test::random_raw_dist(rng, 3, {"x"}));
        Canonical b = canonicalize(ulc::test::random_raw_dist(rng, 3, {"x"}));
        EXPECT_NEAR(std::abs(weight(a + b) - (weight(a) + weight(b))), 0.0, 1e-9);
        auto dab = domain(a + b);
        for (const auto &t : domain(a)) {
            EXPECT_TRUE((a + b).contains(t));
        }
        for (const auto &t : domain(b)) {
            EXPECT_TRUE((a + b).contains(t));
        }
        for (const auto &t : dab) {
            EXPECT_TRUE(a.contains(t) || b.contains(t));
        }
    }
}

// alpha1.t1 + s1 == alpha2.t2 + s2, built by decomposing one distribution
// twice; the lemma's case analysis is then checked directly.
TEST(SimplifyingEqualities, CaseAnalysis) {
    Rng rng(16);
    int checked[3] = {0, 0, 0};
    for (int i = 0; i < 2000; ++i) {
        std::vector<Summand> items;
        int n = 1 + rng.below(3);
        for (int k = 0; k < n; ++k) {
            items.push_back(Summand{rng.coin(0.3) ? Scalar(rng.below(3)) : rng.scalar(), var("t" + std::to_string(k))});
        }
        Canonical d = canonicalize_summands(items);
        auto dom = domain(d);
        TermPtr t1 = rng.pick(dom);
        TermPtr t2 = rng.coin(0.4) ? t1 : rng.pick(dom);
        Scalar a1 = rng.coin(0.5) ? *d.coefficient(t1) : Scalar(rng.below(3));
        Scalar a2 = rng.coin(0.3) ? a1 : (rng.coin(0.5) ? *d.coefficient(t2) : Scalar(rng.below(3)));
        auto r1s = remainders(d, a1, t1);
        auto r2s = remainders(d, a2, t2);
        const Canonical &s1 = rng.pick(r1s);
        const Canonical &s2 = rng.pick(r2s);
        ASSERT_TRUE((Canonical::of(t1, a1) + s1).equals(Canonical::of(t2, a2) + s2, kExact));

        if (alpha_equal(t1, t2) && std::abs(a1 - a2) < kExact) {
            bool ok = s1.equals(s2, kExact) || s1.equals(s2 + Canonical::of(t1, 0.0), kExact) ||
                      s2.equals(s1 + Canonical::of(t1, 0.0), kExact);
            EXPECT_TRUE(ok);
            ++checked[0];
        } else if (alpha_equal(t1, t2)) {
            bool ok = s1.equals(s2 + Canonical::of(t1, a2 - a1), kExact) ||
                      s2.equals(s1 + Canonical::of(t1, a1 - a2), kExact);
            EXPECT_TRUE(ok);
            ++checked[1];
        } else {
            bool ok = false;
            for (const auto &s3 : remainders(s1, a2, t2)) {
                ok = ok || s2.equals(s3 + Canonical::of(t1, a1), kExact);
            }
            EXPECT_TRUE(ok);
            ++checked[2];
        }
    }
    EXPECT_GT(checked[0], 50);
    EXPECT_GT(checked[1], 50);
    EXPECT_GT(checked[2], 50);
}

namespace {

// Value distributions mentioning x, e.g. a.x + b.(x, tt) + c.ff.
Canonical open_values(Rng &rng) {
    static const std::vector<TermPtr> pool{var("x"), tt(), ff(), pair(var("x"), tt()), inl(var("x")),
                                           lam("y", single(app(var("y"), var("x"))))};
    std::vector<Summand> items;
    int n = 1 + rng.below(3);
    for (int k = 0; k < n; ++k) {
        items.push_back(Summand{rng.scalar(), rng.pick(pool)});
    }
    return canonicalize_summands(items);
}

Canonical open_terms(Rng &rng, const std::vector<std::string> &free) {
    std::vector<DistPtr> items;
    int n = 1 + rng.below(2);
    for (int k = 0; k < n; ++k) {
        items.push_back(scale(rng.scalar(), ulc::test::random_raw_term(rng, 2, free)));
    }
    return canonicalize(sum_all(items));
}

}  // namespace

TEST(BilinearSubstitute, StructuralIdentities) {
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        Canonical w = ulc::test::random_vector(rng, prod_type(bool_type(), unit_type()));
        Canonical v = open_values(rng);
        Canonical v2 = open_values(rng);
        Canonical closed_v = ulc::test::random_vector(rng, bool_type());
        auto bs = [&w](const Canonical &c) { return bilinear_substitute(c, "x", w); };

        EXPECT_TRUE(bs(lift_constructor(Ctor::Inl, {v})).equals(lift_constructor(Ctor::Inl, {bs(v)}), 1e-9));
        EXPECT_TRUE(bs(lift_constructor(Ctor::Inr, {v})).equals(lift_constructor(Ctor::Inr, {bs(v)}), 1e-9));
        EXPECT_TRUE(
            bs(lift_constructor(Ctor::Pair, {closed_v, v2})).equals(lift_constructor(Ctor::Pair, {closed_v, bs(v2)}), 1e-9));
        EXPECT_TRUE(
            bs(lift_constructor(Ctor::Pair, {v, closed_v})).equals(lift_constructor(Ctor::Pair, {bs(v), closed_v}), 1e-9));

        Canonical s = open_terms(rng, {"y"});
        Canonical t = open_terms(rng, {"x", "y"});
        EXPECT_TRUE(bs(lift_constructor(Ctor::App, {s, t})).equals(lift_constructor(Ctor::App, {s, bs(t)}), 1e-9));
        EXPECT_TRUE(bs(lift_constructor(Ctor::App, {t, s})).equals(lift_constructor(Ctor::App, {bs(t), s}), 1e-9));

        DistPtr body = ulc::test::random_raw_dist(rng, 2, {"y", "x1", "x2"});
        LiftShape seq_shape{"", "", body, nullptr};
        EXPECT_TRUE(bs(lift_constructor(Ctor::Seq, {t}, seq_shape))
                        .equals(lift_constructor(Ctor::Seq, {bs(t)}, seq_shape), 1e-9));
        LiftShape let_shape{"x1", "x2", abstract(body, {"x1", "x2"}), nullptr};
        EXPECT_TRUE(bs(lift_constructor(Ctor::LetPair, {t}, let_shape))
                        .equals(lift_constructor(Ctor::LetPair, {bs(t)}, let_shape), 1e-9));
        DistPtr other = ulc::test::random_raw_dist(rng, 2, {"y", "x2"});
        LiftShape match_shape{"x1", "x2", abstract(body, {"x1"}), abstract(other, {"x2"})};
        EXPECT_TRUE(bs(lift_constructor(Ctor::Match, {t}, match_shape))
                        .equals(lift_constructor(Ctor::Match, {bs(t)}, match_shape), 1e-9));
    }
}

TEST(BilinearSubstitute, CommutesForDistinctVariables) {
    Rng rng(18);
    for (int i = 0; i < 200; ++i) {
        Canonical t = open_terms(rng, {"x", "y"});
        Canonical v = ulc::test::random_vector(rng, bool_type());
        Canonical w = ulc::test::random_vector(rng, prod_type(bool_type(), bool_type()));
        Canonical lhs = bilinear_substitute(bilinear_substitute(t, "x", v), "y", w);
        Canonical rhs = bilinear_substitute(bilinear_substitute(t, "y", w), "x", v);
        EXPECT_TRUE(lhs.equals(rhs, 1e-9));
    }
}
