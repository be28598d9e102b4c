#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "ulc/errors.hpp"
#include "ulc/prelude.hpp"
#include "ulc/semantics.hpp"
#include "ulc/syntax.hpp"

using namespace ulc;
using ulc::test::Rng;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

TypePtr B() { return bool_type(); }
TypePtr SB() { return sharp(bool_type()); }

Canonical ket(Scalar a, Scalar b) { return canonicalize(sum(scale(a, tt()), scale(b, ff()))); }
Canonical plus() { return canonicalize(ket_plus()); }
Canonical minus() { return canonicalize(ket_minus()); }

void expect_matrix(const Matrix &m, const std::vector<std::vector<Scalar>> &expected) {
    ASSERT_EQ(m.size(), expected.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        ASSERT_EQ(m[i].size(), expected[i].size());
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            EXPECT_NEAR(std::abs(m[i][j] - expected[i][j]), 0.0, 1e-7) << "entry " << i << "," << j;
        }
    }
}

Canonical apply_to(const Canonical &f, const Canonical &v) { return lift_constructor(Ctor::App, {f, v}); }

Canonical nf_or_self(const Canonical &d) { return normalize(d).result; }

// Closed finite data types used for the membership properties.
std::vector<TypePtr> data_types() {
    TypePtr u = unit_type();
    return {u,
            B(),
            SB(),
            flat(SB()),
            sum_type(SB(), u),
            sharp(sum_type(B(), u)),
            prod_type(B(), B()),
            prod_type(SB(), B()),
            prod_type(SB(), SB()),
            otimes(B(), B()),
            otimes(SB(), SB()),
            flat(otimes(SB(), SB()))};
}

// Values over the basis of t: basis elements, unit vectors, product states
// and unnormalised vectors.
Canonical random_member_candidate(Rng &rng, const TypePtr &t) {
    auto basis = basis_of_type(t);
    switch (rng.below(4)) {
    case 0:
        return Canonical::of(rng.pick(basis), rng.coin() ? Scalar(1.0) : Scalar(0.0, -1.0));
    case 1:
        return ulc::test::random_unit_vector(rng, t);
    case 2:
        if (t->kind == TypeKind::Prod || normal_form(t)->kind == TypeKind::Prod) {
            TypePtr p = normal_form(t)->kind == TypeKind::Prod ? normal_form(t) : t;
            return lift_constructor(Ctor::Pair, {ulc::test::random_unit_vector(rng, p->l),
                                                  ulc::test::random_unit_vector(rng, p->r)});
        }
        return ulc::test::random_unit_vector(rng, t);
    default:
        return ulc::test::random_vector(rng, t);
    }
}

}  // namespace

// ---------------------------------------------------------------- inner product and norm

TEST(InnerProduct, Examples) {
    EXPECT_NEAR(std::abs(inner_product(Canonical::of(tt()), Canonical::of(ff()))), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(inner_product(plus(), minus())), 0.0, 1e-12);
    Canonical v = ket(kInvSqrt2, Scalar(0.0, kInvSqrt2));
    EXPECT_NEAR(std::abs(inner_product(v, v) - Scalar(1.0)), 0.0, 1e-12);
}

TEST(InnerProduct, ConjugateLinearOnTheLeft) {
    Canonical v = ket(Scalar(0.0, 1.0), 0.0);
    Canonical w = Canonical::of(tt());
    EXPECT_NEAR(std::abs(inner_product(v, w) - Scalar(0.0, -1.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(inner_product(w, v) - Scalar(0.0, 1.0)), 0.0, 1e-12);
}

TEST(InnerProduct, RejectsOpenValues) {
    EXPECT_THROW(inner_product(Canonical::of(var("x")), Canonical::of(tt())), OpenValueError);
    EXPECT_THROW(norm(Canonical::of(pair(var("x"), tt()))), OpenValueError);
}

TEST(Norm, Examples) {
    EXPECT_NEAR(norm(plus()), 1.0, 1e-12);
    EXPECT_NEAR(norm(Canonical::of(tt(), 0.0)), 0.0, 1e-12);
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        Canonical v = ulc::test::random_vector(rng, B());
        Canonical w = ulc::test::random_vector(rng, prod_type(unit_type(), B()));
        EXPECT_NEAR(norm(lift_constructor(Ctor::Pair, {v, w})), norm(v) * norm(w), 1e-9);
        EXPECT_NEAR(norm(lift_constructor(Ctor::Inl, {v})), norm(v), 1e-9);
    }
}

// ---------------------------------------------------------------- bases

TEST(BasisOfType, Examples) {
    auto b = basis_of_type(B());
    ASSERT_EQ(b.size(), 2U);
    EXPECT_TRUE(alpha_equal(b[0], tt()));
    EXPECT_TRUE(alpha_equal(b[1], ff()));

    auto bb = basis_of_type(otimes(SB(), SB()));
    const std::vector<TermPtr> expected{pair(tt(), tt()), pair(tt(), ff()), pair(ff(), tt()), pair(ff(), ff())};
    ASSERT_EQ(bb.size(), expected.size());
    for (std::size_t i = 0; i < bb.size(); ++i) {
        EXPECT_TRUE(alpha_equal(bb[i], expected[i])) << i;
    }

    auto u = basis_of_type(unit_type());
    ASSERT_EQ(u.size(), 1U);
    EXPECT_TRUE(alpha_equal(u[0], void_term()));

    EXPECT_EQ(basis_of_type(flat(sharp(sum_type(B(), unit_type())))).size(), 3U);
    EXPECT_THROW(basis_of_type(pure_arrow(B(), B())), UnsupportedType);
}

// ---------------------------------------------------------------- membership

TEST(MemberValue, Examples) {
    EXPECT_EQ(member_value(ket(0.6, Scalar(0.0, 0.8)), SB()), Tri::Yes);
    EXPECT_EQ(member_value(Canonical::of(tt(), Scalar(0.0, 1.0)), SB()), Tri::Yes);
    EXPECT_EQ(member_value(Canonical::of(tt()), flat(SB())), Tri::Yes);
}

TEST(MemberValue, Rejections) {
    EXPECT_EQ(member_value(Canonical::of(tt(), 0.5), SB()), Tri::No);
    EXPECT_EQ(member_value(plus(), B()), Tri::No);
    EXPECT_EQ(member_value(plus(), flat(SB())), Tri::No);
    EXPECT_EQ(member_value(Canonical::of(void_term()), B()), Tri::No);
    EXPECT_EQ(member_value(Canonical::of(tt(), Scalar(0.0, 1.0)), B()), Tri::No);
    EXPECT_THROW(member_value(Canonical::of(app(identity_fn(), tt())), SB()), NotNormalError);
}

TEST(MemberValue, ProductsAndEntanglement) {
    Canonical prod = lift_constructor(Ctor::Pair, {plus(), Canonical::of(tt())});
    EXPECT_EQ(member_value(prod, prod_type(SB(), B())), Tri::Yes);
    EXPECT_EQ(member_value(prod, prod_type(B(), SB())), Tri::No);
    Canonical bell = canonicalize(sum(scale(kInvSqrt2, pair(tt(), tt())), scale(kInvSqrt2, pair(ff(), ff()))));
    EXPECT_EQ(member_value(bell, prod_type(SB(), SB())), Tri::No);
    EXPECT_EQ(member_value(bell, otimes(SB(), SB())), Tri::Yes);
    EXPECT_EQ(member_value(bell, otimes(B(), B())), Tri::Yes);
}

TEST(MemberValue, SumsAndArrows) {
    Canonical left = lift_constructor(Ctor::Inl, {plus()});
    EXPECT_EQ(member_value(left, sum_type(SB(), unit_type())), Tri::Yes);
    EXPECT_EQ(member_value(canonicalize(sum(scale(kInvSqrt2, inl(tt())), scale(kInvSqrt2, inr(void_term())))),
                           sum_type(SB(), unit_type())),
              Tri::No);
    EXPECT_EQ(member_value(Canonical::of(negation()), pure_arrow(B(), B())), Tri::Yes);
    EXPECT_EQ(member_value(Canonical::of(hadamard()), pure_arrow(B(), B())), Tri::No);
    EXPECT_EQ(member_value(Canonical::of(hadamard()), pure_arrow(SB(), SB())), Tri::Yes);
    EXPECT_EQ(member_value(Canonical::of(k_tt()), pure_arrow(B(), B())), Tri::Yes);
    EXPECT_EQ(member_value(Canonical::of(k_tt()), pure_arrow(SB(), SB())), Tri::No);
}

TEST(Realizes, Examples) {
    EXPECT_EQ(realizes(Canonical::of(app(hadamard(), tt())), SB()), Tri::Yes);
    EXPECT_EQ(realizes(Canonical::of(tt()), SB()), Tri::Yes);
    EXPECT_EQ(realizes(Canonical::of(tt(), 1.4), SB()), Tri::No);
    EXPECT_EQ(realizes(Canonical::of(y_combinator(tt())), SB(), 100), Tri::Unsupported);
}

// ---------------------------------------------------------------- types

TEST(Subtype, Examples) {
    EXPECT_TRUE(subtype(B(), SB()));
    EXPECT_FALSE(subtype(SB(), B()));
    EXPECT_FALSE(subtype(flat(unit_arrow(SB(), SB())), unit_arrow(SB(), SB())));
    EXPECT_TRUE(type_equiv(flat(sharp(B())), flat(B())));
    EXPECT_TRUE(type_equiv(flat(flat(SB())), flat(SB())));
    EXPECT_TRUE(type_equiv(sharp(sharp(B())), SB()));
    EXPECT_TRUE(subtype(pure_arrow(SB(), SB()), unit_arrow(SB(), SB())));
    EXPECT_FALSE(subtype(unit_arrow(SB(), SB()), pure_arrow(SB(), SB())));
    EXPECT_TRUE(subtype(unit_arrow(SB(), SB()), sharp(unit_arrow(SB(), SB()))));
    EXPECT_TRUE(subtype(sum_type(SB(), SB()), sharp(sum_type(B(), B()))));
    EXPECT_TRUE(subtype(prod_type(SB(), SB()), otimes(B(), B())));
    EXPECT_FALSE(subtype(otimes(B(), B()), prod_type(SB(), SB())));
    EXPECT_TRUE(type_equiv(flat(prod_type(SB(), unit_type())), prod_type(B(), unit_type())));
    EXPECT_TRUE(type_equiv(flat(pure_arrow(SB(), SB())), pure_arrow(SB(), SB())));
    EXPECT_TRUE(subtype(B(), sharp(flat(B()))));
}

TEST(IsPureType, Examples) {
    EXPECT_TRUE(is_pure_type(B()));
    EXPECT_FALSE(is_pure_type(SB()));
    EXPECT_TRUE(is_pure_type(pure_arrow(SB(), SB())));
    EXPECT_FALSE(is_pure_type(unit_arrow(SB(), SB())));
    EXPECT_TRUE(is_pure_type(flat(unit_arrow(SB(), SB()))));
    EXPECT_FALSE(is_pure_type(prod_type(B(), SB())));
}

// ---------------------------------------------------------------- unitarity

TEST(CheckUnitary, Hadamard) {
    UnitaryReport r = check_unitary_endo(Canonical::of(hadamard()), SB(), SB(), ArrowKind::Pure);
    EXPECT_EQ(r.verdict, Tri::Yes) << r.message;
    expect_matrix(r.matrix, {{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}});
    expect_matrix(r.gram, {{1.0, 0.0}, {0.0, 1.0}});
}

TEST(CheckUnitary, IdentityAndNegation) {
    UnitaryReport id = check_unitary_endo(Canonical::of(identity_fn()), SB(), SB(), ArrowKind::Pure);
    EXPECT_EQ(id.verdict, Tri::Yes);
    expect_matrix(id.matrix, {{1.0, 0.0}, {0.0, 1.0}});
    UnitaryReport n = check_unitary_endo(Canonical::of(negation()), SB(), SB(), ArrowKind::Pure);
    EXPECT_EQ(n.verdict, Tri::Yes);
    expect_matrix(n.matrix, {{0.0, 1.0}, {1.0, 0.0}});
}

TEST(CheckUnitary, ConstantFunctionFails) {
    UnitaryReport r = check_unitary_endo(Canonical::of(k_tt()), SB(), SB(), ArrowKind::Pure);
    EXPECT_EQ(r.verdict, Tri::No);
    ASSERT_EQ(r.gram.size(), 2U);
    EXPECT_NEAR(std::abs(r.gram[0][1] - Scalar(1.0)), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(r.gram[1][0] - Scalar(1.0)), 0.0, 1e-9);
}

TEST(CheckUnitary, DistributionOfAbstractions) {
    Canonical f = canonicalize(fact_f());
    UnitaryReport r = check_unitary_endo(f, SB(), SB(), ArrowKind::Unit);
    EXPECT_EQ(r.verdict, Tri::Yes) << r.message;
    expect_matrix(r.matrix, {{1.0, 0.0}, {0.0, 1.0}});
    EXPECT_NE(check_unitary_endo(f, SB(), SB(), ArrowKind::Pure).verdict, Tri::Yes);
}

TEST(CheckUnitary, ControlledHadamardOnTwoQubits) {
    Canonical f = canonicalize(single(app(ctl_bar(), hadamard())));
    TypePtr d = otimes(SB(), SB());
    UnitaryReport r = check_unitary_endo(f, d, d, ArrowKind::Pure);
    EXPECT_EQ(r.verdict, Tri::Yes) << r.message;
    // ctl fires on tt: H acts on the (tt, _) block.
    const double h = kInvSqrt2;
    expect_matrix(r.matrix, {{h, h, 0, 0}, {h, -h, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
}

TEST(CheckUnitary, RejectsArrowDomains) {
    TypePtr a = sharp(pure_arrow(B(), B()));
    EXPECT_THROW(check_unitary_endo(Canonical::of(identity_fn()), a, a, ArrowKind::Pure), UnsupportedType);
    EXPECT_THROW(check_unitary_endo(Canonical::of(identity_fn()), SB(), otimes(SB(), SB()), ArrowKind::Pure),
                 UnsupportedType);
}

TEST(BooleanProjection, Examples) {
    auto basis = basis_of_type(B());
    Scalar a{0.3, 0.1};
    Scalar b{-0.5, 0.0};
    auto p1 = boolean_projection(Canonical::of(tt(), a), basis);
    ASSERT_EQ(p1.size(), 2U);
    EXPECT_EQ(p1[0], a);
    EXPECT_EQ(p1[1], Scalar(0.0));
    auto p2 = boolean_projection(ket(a, b), basis);
    EXPECT_EQ(p2[0], a);
    EXPECT_EQ(p2[1], b);
    auto p3 = boolean_projection(Canonical{}, basis);
    EXPECT_EQ(p3, (std::vector<Scalar>{0.0, 0.0}));
    EXPECT_THROW(boolean_projection(Canonical::of(void_term()), basis), DomainError);
}

// ---------------------------------------------------------------- properties

TEST(SemanticsProperties, InnerProductOfConstructors) {
    Rng rng(32);
    for (int i = 0; i < 300; ++i) {
        TypePtr t = rng.coin() ? B() : prod_type(B(), unit_type());
        Canonical v1 = ulc::test::random_vector(rng, t);
        Canonical v2 = ulc::test::random_vector(rng, t);
        Canonical w1 = ulc::test::random_vector(rng, B());
        Canonical w2 = ulc::test::random_vector(rng, B());
        auto inl_ = [](const Canonical &v) { return lift_constructor(Ctor::Inl, {v}); };
        auto inr_ = [](const Canonical &v) { return lift_constructor(Ctor::Inr, {v}); };
        EXPECT_NEAR(std::abs(inner_product(inl_(v1), inl_(v2)) - inner_product(v1, v2)), 0.0, 1e-7);
        EXPECT_NEAR(std::abs(inner_product(inr_(v1), inr_(v2)) - inner_product(v1, v2)), 0.0, 1e-7);
        EXPECT_NEAR(std::abs(inner_product(inl_(v1), inr_(v2))), 0.0, 1e-7);
        Scalar lhs = inner_product(lift_constructor(Ctor::Pair, {v1, w1}), lift_constructor(Ctor::Pair, {v2, w2}));
        EXPECT_NEAR(std::abs(lhs - inner_product(v1, v2) * inner_product(w1, w2)), 0.0, 1e-7);
        EXPECT_NEAR(std::abs(inner_product(v1, v2) - std::conj(inner_product(v2, v1))), 0.0, 1e-12);
    }
}

TEST(SemanticsProperties, Polarization) {
    Rng rng(33);
    const Scalar i{0.0, 1.0};
    for (int k = 0; k < 300; ++k) {
        TypePtr t = rng.coin() ? B() : otimes(B(), B());
        Canonical v = ulc::test::random_vector(rng, t);
        Canonical w = ulc::test::random_vector(rng, t);
        auto sq = [](const Canonical &c) { return norm(c) * norm(c); };
        Scalar rhs = 0.25 * (sq(v + w) - sq(v + w * Scalar(-1.0)) - i * sq(v + w * i) + i * sq(v + w * (-i)));
        EXPECT_NEAR(std::abs(inner_product(v, w) - rhs), 0.0, 1e-7);
    }
}

TEST(SemanticsProperties, CombNormalize) {
    Rng rng(34);
    auto basis = basis_of_type(B());
    for (int k = 0; k < 300; ++k) {
        Canonical u1 = ulc::test::random_unit_vector(rng, B());
        Canonical u2 = rng.coin(0.2) ? u1 : ulc::test::random_unit_vector(rng, B());
        Scalar alpha = rng.coin(0.2) ? Scalar(-1.0) : rng.scalar();
        auto [lambda, u0] = comb_normalize(u1, u2, alpha);
        EXPECT_EQ(member_value(u0, SB()), Tri::Yes);
        auto lhs = boolean_projection(u1 + u2 * alpha, basis);
        auto rhs = boolean_projection(u0 * lambda, basis);
        for (std::size_t j = 0; j < basis.size(); ++j) {
            EXPECT_NEAR(std::abs(lhs[j] - rhs[j]), 0.0, 1e-9);
        }
    }
}

// check_unitary_endo passes exactly when every sampled unit input is sent
// to a unit output.
TEST(SemanticsProperties, UnitaryIffUnitOnSamples) {
    Rng rng(35);
    struct Case {
        Canonical f;
        TypePtr dom;
        ArrowKind arrow;
    };
    TypePtr two = otimes(SB(), SB());
    const std::vector<Case> cases{
        {Canonical::of(hadamard()), SB(), ArrowKind::Pure},
        {Canonical::of(identity_fn()), SB(), ArrowKind::Pure},
        {Canonical::of(negation()), SB(), ArrowKind::Pure},
        {Canonical::of(k_tt()), SB(), ArrowKind::Pure},
        {Canonical::of(k_ff()), SB(), ArrowKind::Pure},
        {canonicalize(fact_f()), SB(), ArrowKind::Unit},
        {canonicalize(parse_dist("lam x. 0.5 * x")), SB(), ArrowKind::Pure},
        {canonicalize(parse_dist("lam x. if x then tt else 0.6 * tt + 0.8 * ff")), SB(), ArrowKind::Pure},
        {nf_or_self(Canonical::of(app(ctl_bar(), hadamard()))), two, ArrowKind::Pure},
        {nf_or_self(Canonical::of(app(ctl_bar(true), negation()))), two, ArrowKind::Pure},
        {canonicalize(parse_dist("lam p. let (a, b) = p in (b, a)")), two, ArrowKind::Pure},
        {canonicalize(parse_dist("lam p. let (a, b) = p in (a, a)")), two, ArrowKind::Pure},
    };
    for (const auto &c : cases) {
        UnitaryReport r = check_unitary_endo(c.f, c.dom, c.dom, c.arrow);
        ASSERT_NE(r.verdict, Tri::Unsupported) << r.message;
        bool all_unit = true;
        for (int k = 0; k < 100; ++k) {
            Canonical v = ulc::test::random_unit_vector(rng, c.dom);
            Tri t = realizes(apply_to(c.f, v), c.dom);
            ASSERT_NE(t, Tri::Unsupported);
            all_unit = all_unit && t == Tri::Yes;
        }
        EXPECT_EQ(r.verdict == Tri::Yes, all_unit) << to_string(c.f);
    }
}

TEST(SemanticsProperties, RealizabilityAgreesWithMembershipOnValues) {
    Rng rng(36);
    for (int k = 0; k < 500; ++k) {
        auto types = data_types();
        TypePtr a = rng.pick(types);
        TypePtr b = rng.pick(types);
        auto basis = basis_of_type(a);
        if (basis.size() != basis_of_type(b).size()) {
            b = a;
        }
        Canonical v = random_member_candidate(rng, a);
        EXPECT_EQ(realizes(v, b), member_value(v, b)) << to_string(v) << " : " << to_string(b);
    }
}

TEST(SemanticsProperties, SubtypingIsSound) {
    Rng rng(37);
    auto types = data_types();
    int checked = 0;
    for (const auto &a : types) {
        for (const auto &b : types) {
            if (!subtype(a, b)) {
                continue;
            }
            for (int k = 0; k < 40; ++k) {
                Canonical v = random_member_candidate(rng, a);
                if (member_value(v, a) != Tri::Yes) {
                    continue;
                }
                ++checked;
                EXPECT_EQ(member_value(v, b), Tri::Yes) << to_string(v) << " : " << to_string(a) << " <= " << to_string(b);
            }
        }
    }
    EXPECT_GT(checked, 300);
}
