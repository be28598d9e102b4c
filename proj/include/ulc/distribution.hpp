#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ulc/scalar.hpp"
#include "ulc/term.hpp"

namespace ulc {

struct Summand {
    Scalar coef;
    TermPtr term;
};

// Canonical form of a top-level distribution: summands sorted by the
// structural term order, pairwise alpha-distinct. Zero coefficients are
// kept; an empty list is the zero vector.
class Canonical {
  public:
    Canonical() = default;

    static Canonical of(TermPtr t, Scalar c = 1.0);

    const std::vector<Summand> &summands() const { return summands_; }
    std::size_t size() const { return summands_.size(); }
    bool empty() const { return summands_.empty(); }
    auto begin() const { return summands_.begin(); }
    auto end() const { return summands_.end(); }

    // Coefficient of t, or nullopt when t is not in the domain.
    std::optional<Scalar> coefficient(const TermPtr &t) const;
    bool contains(const TermPtr &t) const;

    Canonical operator+(const Canonical &other) const;
    Canonical operator*(Scalar c) const;

    // Structural equality of the summand lists: same domain, coefficients
    // within tol.
    bool equals(const Canonical &other, double tol) const;
    bool operator==(const Canonical &other) const { return equals(other, epsilon()); }

    // Debugging only: drop summands whose coefficient is within tol of 0.
    // Never used by the engine.
    Canonical drop_zeros(double tol) const;

  private:
    friend Canonical canonicalize_summands(std::vector<Summand> items);
    std::vector<Summand> summands_;
};

// Sort and merge a summand list by exact coefficient addition.
Canonical canonicalize_summands(std::vector<Summand> items);
Canonical canonicalize(const DistPtr &d);
DistPtr to_raw(const Canonical &c);

std::vector<TermPtr> domain(const Canonical &c);
Scalar weight(const Canonical &c);
bool is_value_distribution(const Canonical &c);
std::set<std::string> free_vars(const Canonical &c);
bool is_closed(const Canonical &c);

enum class Ctor { Pair, Inl, Inr, App, Seq, LetPair, Match };

// Template for the linearly extended constructors. For Seq/LetPair/Match
// only args[0] (the scrutinee) is a distribution; the continuation bodies
// (already abstracted) and hints are taken from `shape`.
struct LiftShape {
    std::string h1, h2;
    DistPtr body1, body2;
};

Canonical lift_constructor(Ctor kind, const std::vector<Canonical> &args, const LiftShape &shape = {});

// Linear extension applied to raw distributions, preserving the tree
// shape of the arguments (used when building raw bodies).
DistPtr lift_raw(Ctor kind, const std::vector<DistPtr> &args, const LiftShape &shape = {});

// t<x := v> = sum_j beta_j . t[x := w_j]; v must be a closed value
// distribution.
Canonical bilinear_substitute(const Canonical &t, const std::string &x, const Canonical &v);

}  // namespace ulc
