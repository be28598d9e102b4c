#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ulc/distribution.hpp"
#include "ulc/eval.hpp"
#include "ulc/types.hpp"

namespace ulc {

enum class Tri { Yes, No, Unsupported };

const char *to_string(Tri t);
Tri tri_and(Tri a, Tri b);
Tri tri_or(Tri a, Tri b);
inline Tri tri_of(bool b) { return b ? Tri::Yes : Tri::No; }

using Matrix = std::vector<std::vector<Scalar>>;

// Conjugate-linear on the left. Both arguments must be closed value
// distributions (OpenValueError / ShapeError otherwise).
Scalar inner_product(const Canonical &v, const Canonical &w);
double norm(const Canonical &v);
bool in_sphere(const Canonical &v);

// Coefficients of v over `basis`; DomainError if v has a summand outside.
std::vector<Scalar> boolean_projection(const Canonical &v, const std::vector<TermPtr> &basis);

// Decide v in [[A]] on the supported fragment. v must be closed and
// normal (NotNormalError otherwise).
Tri member_value(const Canonical &v, const TypePtr &a, std::size_t fuel = kDefaultFuel);

// t realizes A: t normalizes to a member of [[A]]. Running out of fuel
// gives Unsupported.
Tri realizes(const Canonical &t, const TypePtr &a, std::size_t fuel = kDefaultFuel);

enum class ArrowKind { Pure, Unit };

struct UnitaryReport {
    Tri verdict = Tri::Unsupported;
    std::string message;
    std::vector<TermPtr> basis_inputs;
    std::vector<Canonical> images;
    Matrix gram;
    Matrix matrix;  // column k holds the coefficients of images[k]
};

constexpr double kGramTolerance = 1e-7;

// f at #D1 -> #D2 (pure) or #D1 => #D2 (unit), with D1, D2 arrow-free
// and of the same dimension. Throws UnsupportedType outside that shape.
UnitaryReport check_unitary_endo(const Canonical &f, const TypePtr &a, const TypePtr &b, ArrowKind arrow,
                                 std::size_t fuel = kDefaultFuel);

// For u1, u2 unit vectors: returns (lambda, u0) with u0 a unit vector and
// u1 + alpha.u2 = lambda.u0 (as vectors over the joint domain).
std::pair<Scalar, Canonical> comb_normalize(const Canonical &u1, const Canonical &u2, Scalar alpha);

}  // namespace ulc
