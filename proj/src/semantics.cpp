#include "ulc/semantics.hpp"

#include <cmath>

#include "ulc/errors.hpp"

namespace ulc {

namespace {

void require_closed_values(const Canonical &v) {
    if (!is_value_distribution(v)) {
        throw ShapeError("expected a value distribution");
    }
    if (!is_closed(v)) {
        throw OpenValueError("expected a closed value distribution");
    }
}

bool single_with_unit_coef(const Canonical &v) { return v.size() == 1 && near(v.summands()[0].coef, 1.0); }

bool is_sharp_data(const TypePtr &nf) { return nf->kind == TypeKind::Sharp && is_data_type(nf->l); }

bool is_pure_data(const TypePtr &nf) { return is_data_type(nf) && is_pure_type(nf); }

bool all_abstractions(const Canonical &v) {
    for (const auto &s : v) {
        if (s.term->kind != Kind::Lam) {
            return false;
        }
    }
    return !v.empty();
}

// lam x. (sum_i alpha_i . t_i) for a distribution of abstractions.
DistPtr merged_body(const Canonical &v) {
    std::vector<DistPtr> parts;
    for (const auto &s : v) {
        parts.push_back(scale(s.coef, s.term->d1));
    }
    return sum_all(parts);
}

Canonical apply_body(const DistPtr &body, const TermPtr &input) { return canonicalize(instantiate(body, {input})); }

Tri member_nf(const Canonical &v, const TypePtr &a, std::size_t fuel);

// Each image body[x := b] for b in the basis of the pure data type `dom`
// must realize `cod`.
Tri probe_pure_domain(const DistPtr &body, const TypePtr &dom, const TypePtr &cod, std::size_t fuel) {
    Tri acc = Tri::Yes;
    for (const auto &b : basis_of_type(dom)) {
        auto out = normalize(apply_body(body, b), fuel);
        if (!out.normal) {
            acc = tri_and(acc, Tri::Unsupported);
            continue;
        }
        acc = tri_and(acc, member_nf(out.result, cod, fuel));
        if (acc == Tri::No) {
            return acc;
        }
    }
    return acc;
}

Tri arrow_member(const Canonical &v, const TypePtr &a, std::size_t fuel) {
    const bool unitary = a->kind == TypeKind::UArrow;
    if (unitary) {
        if (!all_abstractions(v) || !in_sphere(v)) {
            return Tri::No;
        }
    } else if (!single_with_unit_coef(v) || v.summands()[0].term->kind != Kind::Lam) {
        return Tri::No;
    }
    const TypePtr &dom = a->l;
    const TypePtr &cod = a->r;
    if (is_pure_data(dom)) {
        return probe_pure_domain(merged_body(v), dom, cod, fuel);
    }
    if (is_sharp_data(dom) && is_sharp_data(cod)) {
        try {
            auto report = check_unitary_endo(v, dom, cod, unitary ? ArrowKind::Unit : ArrowKind::Pure, fuel);
            return report.verdict;
        } catch (const UnsupportedType &) {
            return Tri::Unsupported;
        }
    }
    return Tri::Unsupported;
}

Tri prod_member(const Canonical &v, const TypePtr &a, std::size_t fuel) {
    if (v.empty()) {
        return Tri::No;
    }
    std::vector<TermPtr> rows, cols;
    auto index_of = [](std::vector<TermPtr> &list, const TermPtr &t) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (alpha_equal(list[i], t)) {
                return i;
            }
        }
        list.push_back(t);
        return list.size() - 1;
    };
    struct Entry {
        std::size_t r, c;
        Scalar coef;
    };
    std::vector<Entry> entries;
    for (const auto &s : v) {
        if (s.term->kind != Kind::Pair) {
            return Tri::No;
        }
        std::size_t r = index_of(rows, s.term->a);
        std::size_t c = index_of(cols, s.term->b);
        entries.push_back({r, c, s.coef});
    }
    if (entries.size() != rows.size() * cols.size()) {
        return Tri::No;  // not a full grid, so not a pair of distributions
    }
    Matrix m(rows.size(), std::vector<Scalar>(cols.size()));
    for (const auto &e : entries) {
        m[e.r][e.c] = e.coef;
    }
    std::size_t r0 = 0, c0 = 0;
    double big = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (std::abs(m[r][c]) > big) {
                big = std::abs(m[r][c]);
                r0 = r;
                c0 = c;
            }
        }
    }
    if (big <= epsilon()) {
        return Tri::No;
    }
    std::vector<Scalar> u(rows.size()), w(cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        u[r] = m[r][c0];
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
        w[c] = m[r0][c] / m[r0][c0];
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (std::abs(m[r][c] - u[r] * w[c]) > epsilon() * big) {
                return Tri::No;  // entangled
            }
        }
    }
    double nu = 0.0;
    for (auto x : u) {
        nu += std::norm(x);
    }
    nu = std::sqrt(nu);
    for (auto &x : u) {
        x /= nu;
    }
    for (auto &x : w) {
        x *= nu;
    }
    auto first_phase = [](const std::vector<Scalar> &xs) {
        for (auto x : xs) {
            if (std::abs(x) > epsilon()) {
                return x / std::abs(x);
            }
        }
        return Scalar{1.0, 0.0};
    };
    auto build = [](const std::vector<TermPtr> &terms, const std::vector<Scalar> &coefs) {
        std::vector<Summand> items;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            items.push_back({coefs[i], terms[i]});
        }
        return canonicalize_summands(std::move(items));
    };
    // The split of a global phase between the factors is not determined
    // by v; try it on either side.
    Tri result = Tri::No;
    for (int side = 0; side < 2; ++side) {
        std::vector<Scalar> uu = u, ww = w;
        Scalar p = side == 0 ? first_phase(uu) : first_phase(ww);
        for (auto &x : (side == 0 ? uu : ww)) {
            x /= p;
        }
        for (auto &x : (side == 0 ? ww : uu)) {
            x *= p;
        }
        Tri left = member_nf(build(rows, uu), a->l, fuel);
        Tri right = left == Tri::No ? Tri::No : member_nf(build(cols, ww), a->r, fuel);
        result = tri_or(result, tri_and(left, right));
        if (result == Tri::Yes) {
            break;
        }
    }
    return result;
}

Tri member_nf(const Canonical &v, const TypePtr &a, std::size_t fuel) {
    if (!is_value_distribution(v)) {
        return Tri::No;
    }
    switch (a->kind) {
    case TypeKind::Unit:
        return tri_of(single_with_unit_coef(v) && v.summands()[0].term->kind == Kind::Void);
    case TypeKind::Flat:
        if (!single_with_unit_coef(v)) {
            return Tri::No;
        }
        return member_nf(v, a->l, fuel);
    case TypeKind::Sharp: {
        if (is_data_type(a->l)) {
            auto basis = basis_of_type(a->l);
            for (const auto &s : v) {
                bool found = false;
                for (const auto &b : basis) {
                    if (alpha_equal(s.term, b)) {
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    return Tri::No;
                }
            }
            return tri_of(in_sphere(v));
        }
        // A <= #A is the only thing we can use above arrows.
        return member_nf(v, a->l, fuel) == Tri::Yes ? Tri::Yes : Tri::Unsupported;
    }
    case TypeKind::Sum: {
        if (v.empty()) {
            return Tri::No;
        }
        const Kind side = v.summands()[0].term->kind;
        if (side != Kind::Inl && side != Kind::Inr) {
            return Tri::No;
        }
        std::vector<Summand> inner;
        for (const auto &s : v) {
            if (s.term->kind != side) {
                return Tri::No;
            }
            inner.push_back({s.coef, s.term->a});
        }
        return member_nf(canonicalize_summands(std::move(inner)), side == Kind::Inl ? a->l : a->r, fuel);
    }
    case TypeKind::Prod:
        return prod_member(v, a, fuel);
    case TypeKind::Arrow:
    case TypeKind::UArrow:
        return arrow_member(v, a, fuel);
    }
    return Tri::Unsupported;
}

}  // namespace

const char *to_string(Tri t) {
    switch (t) {
    case Tri::Yes:
        return "yes";
    case Tri::No:
        return "no";
    case Tri::Unsupported:
        return "unsupported";
    }
    return "?";
}

Tri tri_and(Tri a, Tri b) {
    if (a == Tri::No || b == Tri::No) {
        return Tri::No;
    }
    if (a == Tri::Unsupported || b == Tri::Unsupported) {
        return Tri::Unsupported;
    }
    return Tri::Yes;
}

Tri tri_or(Tri a, Tri b) {
    if (a == Tri::Yes || b == Tri::Yes) {
        return Tri::Yes;
    }
    if (a == Tri::Unsupported || b == Tri::Unsupported) {
        return Tri::Unsupported;
    }
    return Tri::No;
}

Scalar inner_product(const Canonical &v, const Canonical &w) {
    require_closed_values(v);
    require_closed_values(w);
    Scalar acc{0.0, 0.0};
    auto i = v.begin();
    auto j = w.begin();
    while (i != v.end() && j != w.end()) {
        int c = compare(i->term, j->term);
        if (c == 0) {
            acc += std::conj(i->coef) * j->coef;
            ++i;
            ++j;
        } else if (c < 0) {
            ++i;
        } else {
            ++j;
        }
    }
    return acc;
}

double norm(const Canonical &v) { return std::sqrt(std::max(0.0, inner_product(v, v).real())); }

bool in_sphere(const Canonical &v) { return std::abs(norm(v) - 1.0) <= epsilon(); }

std::vector<Scalar> boolean_projection(const Canonical &v, const std::vector<TermPtr> &basis) {
    std::vector<Scalar> out(basis.size());
    for (const auto &s : v) {
        bool found = false;
        for (std::size_t k = 0; k < basis.size(); ++k) {
            if (alpha_equal(s.term, basis[k])) {
                out[k] += s.coef;
                found = true;
                break;
            }
        }
        if (!found) {
            throw DomainError("summand outside the projection basis");
        }
    }
    return out;
}

Tri member_value(const Canonical &v, const TypePtr &a, std::size_t fuel) {
    if (!is_normal(v)) {
        throw NotNormalError("member_value expects a normal distribution");
    }
    if (!is_closed(v)) {
        throw OpenValueError("member_value expects a closed distribution");
    }
    return member_nf(v, normal_form(a), fuel);
}

Tri realizes(const Canonical &t, const TypePtr &a, std::size_t fuel) {
    if (!is_closed(t)) {
        throw OpenValueError("realizes expects a closed distribution");
    }
    auto out = normalize(t, fuel);
    if (!out.normal) {
        return Tri::Unsupported;
    }
    return member_nf(out.result, normal_form(a), fuel);
}

UnitaryReport check_unitary_endo(const Canonical &f, const TypePtr &a, const TypePtr &b, ArrowKind arrow,
                                 std::size_t fuel) {
    TypePtr na = normal_form(a);
    TypePtr nb = normal_form(b);
    if (!is_sharp_data(na) || !is_sharp_data(nb)) {
        throw UnsupportedType("unitarity check needs #D1 and #D2 with arrow-free D1, D2");
    }
    UnitaryReport report;
    report.basis_inputs = basis_of_type(na->l);
    auto out_basis = basis_of_type(nb->l);
    if (report.basis_inputs.size() != out_basis.size()) {
        throw UnsupportedType("unitarity check needs bases of equal size");
    }
    if (!is_closed(f)) {
        throw OpenValueError("unitarity check expects a closed term");
    }
    auto nf = normalize(f, fuel);
    if (!nf.normal) {
        report.message = "function did not normalize within the fuel budget";
        return report;
    }
    const Canonical &fv = nf.result;
    if (arrow == ArrowKind::Pure) {
        if (!single_with_unit_coef(fv) || fv.summands()[0].term->kind != Kind::Lam) {
            report.verdict = Tri::No;
            report.message = "not a single abstraction with coefficient 1";
            return report;
        }
    } else if (!all_abstractions(fv) || !in_sphere(fv)) {
        report.verdict = Tri::No;
        report.message = "not a unit-norm distribution of abstractions";
        return report;
    }
    DistPtr body = merged_body(fv);
    const std::size_t n = report.basis_inputs.size();
    report.matrix.assign(n, std::vector<Scalar>(n));
    bool in_span = true;
    for (std::size_t k = 0; k < n; ++k) {
        auto img = normalize(apply_body(body, report.basis_inputs[k]), fuel);
        if (!img.normal) {
            report.verdict = Tri::Unsupported;
            report.message = "image of basis vector did not normalize";
            return report;
        }
        report.images.push_back(img.result);
        try {
            auto col = boolean_projection(img.result, out_basis);
            for (std::size_t j = 0; j < n; ++j) {
                report.matrix[j][k] = col[j];
            }
        } catch (const DomainError &) {
            in_span = false;
        }
    }
    if (!in_span) {
        report.verdict = Tri::No;
        report.message = "an image lies outside the span of the codomain basis";
        return report;
    }
    report.gram.assign(n, std::vector<Scalar>(n));
    bool identity = true;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            report.gram[i][j] = inner_product(report.images[i], report.images[j]);
            Scalar expected = i == j ? 1.0 : 0.0;
            if (!near(report.gram[i][j], expected, kGramTolerance)) {
                identity = false;
            }
        }
    }
    report.verdict = tri_of(identity);
    report.message = identity ? "images are orthonormal" : "gram matrix of images is not the identity";
    return report;
}

std::pair<Scalar, Canonical> comb_normalize(const Canonical &u1, const Canonical &u2, Scalar alpha) {
    Canonical combined = u1 + u2 * alpha;
    double n = norm(combined);
    if (n > epsilon()) {
        return {n, combined * (1.0 / n)};
    }
    // Degenerate: every coefficient vanishes. Any unit vector over the same
    // domain works with lambda = 0.
    if (combined.empty()) {
        throw DomainError("cannot normalize an empty combination");
    }
    std::vector<Summand> items;
    double c = 1.0 / std::sqrt(static_cast<double>(combined.size()));
    for (const auto &s : combined) {
        items.push_back({c, s.term});
    }
    return {0.0, canonicalize_summands(std::move(items))};
}

}  // namespace ulc
