#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "ulc/distribution.hpp"

namespace ulc {

constexpr std::size_t kDefaultFuel = 10000;

struct EvalOutcome {
    bool normal = false;  // false: fuel ran out, `result` is the partial state
    Canonical result;
    std::size_t steps = 0;
};

// t |> t', or nullopt when t is irreducible (normal or stuck).
std::optional<DistPtr> atomic_step(const TermPtr &t);
bool is_reducible(const TermPtr &t);

// Reduce the least reducible summand in canonical order.
std::optional<Canonical> one_step(const Canonical &d);

// Reduce with the explicit decomposition d = alpha.s + r. s must be a
// reducible term of dom(d). When alpha equals the coefficient of s the
// remainder drops s; otherwise it keeps (coef - alpha).s.
Canonical step_with_decomposition(const Canonical &d, const TermPtr &s, Scalar alpha);

bool is_normal(const Canonical &d);

using TraceFn = std::function<void(const Canonical &)>;
// Picks which reducible summand to step: receives the indices of all
// reducible summands (non-empty) and returns one of them.
using Scheduler = std::function<std::size_t(const std::vector<std::size_t> &)>;

EvalOutcome normalize(const Canonical &d, std::size_t fuel = kDefaultFuel, const TraceFn &trace = {});
EvalOutcome normalize_with(const Canonical &d, std::size_t fuel, const Scheduler &pick);

// Y_t = (lam x. t + x x) (lam x. t + x x)
TermPtr y_combinator(const TermPtr &t);

}  // namespace ulc
