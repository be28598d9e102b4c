#include "ulc/types.hpp"

#include "ulc/errors.hpp"

namespace ulc {

namespace {

TypePtr make(TypeKind k, TypePtr l = nullptr, TypePtr r = nullptr) {
    return std::make_shared<const Type>(Type{k, std::move(l), std::move(r)});
}

bool is_bool(const TypePtr &a) {
    return a->kind == TypeKind::Sum && a->l->kind == TypeKind::Unit && a->r->kind == TypeKind::Unit;
}

// 0: arrows, 1: sums, 2: products, 3: prefix/atoms
int precedence(const TypePtr &a) {
    switch (a->kind) {
    case TypeKind::Arrow:
    case TypeKind::UArrow:
        return 0;
    case TypeKind::Sum:
        return is_bool(a) ? 3 : 1;
    case TypeKind::Prod:
        return 2;
    default:
        return 3;
    }
}

std::string wrap(const TypePtr &a, int min_prec) {
    std::string s = to_string(a);
    return precedence(a) < min_prec ? "(" + s + ")" : s;
}

// flat applied to a type already in normal form.
TypePtr flat_nf(const TypePtr &a) {
    switch (a->kind) {
    case TypeKind::Unit:
    case TypeKind::Flat:
    case TypeKind::Arrow:
        return a;
    case TypeKind::Sharp:
        return flat_nf(a->l);
    case TypeKind::Sum:
        return make(TypeKind::Sum, flat_nf(a->l), flat_nf(a->r));
    case TypeKind::Prod:
        return make(TypeKind::Prod, flat_nf(a->l), flat_nf(a->r));
    case TypeKind::UArrow:
        return make(TypeKind::Flat, a);
    }
    return a;
}

TypePtr sharp_nf(const TypePtr &a) { return a->kind == TypeKind::Sharp ? a : make(TypeKind::Sharp, a); }

// Both arguments in normal form.
bool sub_nf(const TypePtr &x, const TypePtr &y);

bool equiv_nf(const TypePtr &x, const TypePtr &y) { return sub_nf(x, y) && sub_nf(y, x); }

bool sub_nf(const TypePtr &x, const TypePtr &y) {
    if (type_equal(x, y)) {
        return true;
    }
    switch (y->kind) {
    case TypeKind::Unit:
        return false;
    case TypeKind::Sharp: {
        const TypePtr &inner = y->l;
        if (sub_nf(x, inner)) {
            return true;  // A <= #A
        }
        if (x->kind == TypeKind::Sharp && sub_nf(x->l, y)) {
            return true;  // monotonicity of # and ##A = #A
        }
        if (x->kind == TypeKind::Sum && inner->kind == TypeKind::Sum) {
            // #A + #B <= #(A + B)
            return sub_nf(x->l, sharp_nf(inner->l)) && sub_nf(x->r, sharp_nf(inner->r));
        }
        if (x->kind == TypeKind::Prod && inner->kind == TypeKind::Prod) {
            return sub_nf(x->l, sharp_nf(inner->l)) && sub_nf(x->r, sharp_nf(inner->r));
        }
        if (inner->kind == TypeKind::Flat) {
            return sub_nf(x, inner->l);  // A <= #(flat A)
        }
        return false;
    }
    case TypeKind::Sum:
    case TypeKind::Prod:
        return x->kind == y->kind && sub_nf(x->l, y->l) && sub_nf(x->r, y->r);
    case TypeKind::Arrow:
        return x->kind == TypeKind::Arrow && equiv_nf(x->l, y->l) && equiv_nf(x->r, y->r);
    case TypeKind::UArrow:
        return (x->kind == TypeKind::Arrow || x->kind == TypeKind::UArrow) && equiv_nf(x->l, y->l) &&
               equiv_nf(x->r, y->r);
    case TypeKind::Flat:
        // y = flat(C => D); flat is monotone and flat(A -> B) = A -> B.
        if (x->kind == TypeKind::Arrow) {
            return sub_nf(x, y->l);
        }
        if (x->kind == TypeKind::Flat) {
            return sub_nf(x->l, y->l);
        }
        return false;
    }
    return false;
}

}  // namespace

TypePtr unit_type() {
    static const TypePtr u = make(TypeKind::Unit);
    return u;
}
TypePtr flat(TypePtr a) { return make(TypeKind::Flat, std::move(a)); }
TypePtr sharp(TypePtr a) { return make(TypeKind::Sharp, std::move(a)); }
TypePtr sum_type(TypePtr a, TypePtr b) { return make(TypeKind::Sum, std::move(a), std::move(b)); }
TypePtr prod_type(TypePtr a, TypePtr b) { return make(TypeKind::Prod, std::move(a), std::move(b)); }
TypePtr pure_arrow(TypePtr a, TypePtr b) { return make(TypeKind::Arrow, std::move(a), std::move(b)); }
TypePtr unit_arrow(TypePtr a, TypePtr b) { return make(TypeKind::UArrow, std::move(a), std::move(b)); }
TypePtr bool_type() { return sum_type(unit_type(), unit_type()); }
TypePtr oplus(TypePtr a, TypePtr b) { return sharp(sum_type(std::move(a), std::move(b))); }
TypePtr otimes(TypePtr a, TypePtr b) { return sharp(prod_type(std::move(a), std::move(b))); }

bool type_equal(const TypePtr &a, const TypePtr &b) {
    if (a == b) {
        return true;
    }
    if (a->kind != b->kind) {
        return false;
    }
    if (a->l && !type_equal(a->l, b->l)) {
        return false;
    }
    if (a->r && !type_equal(a->r, b->r)) {
        return false;
    }
    return true;
}

std::string to_string(const TypePtr &a) {
    switch (a->kind) {
    case TypeKind::Unit:
        return "U";
    case TypeKind::Flat:
        return "!" + wrap(a->l, 3);
    case TypeKind::Sharp:
        return "#" + wrap(a->l, 3);
    case TypeKind::Sum:
        if (is_bool(a)) {
            return "B";
        }
        return wrap(a->l, 1) + " + " + wrap(a->r, 2);
    case TypeKind::Prod:
        return wrap(a->l, 2) + " * " + wrap(a->r, 3);
    case TypeKind::Arrow:
        return wrap(a->l, 1) + " -> " + wrap(a->r, 0);
    case TypeKind::UArrow:
        return wrap(a->l, 1) + " => " + wrap(a->r, 0);
    }
    return "?";
}

TypePtr normal_form(const TypePtr &a) {
    switch (a->kind) {
    case TypeKind::Unit:
        return a;
    case TypeKind::Flat:
        return flat_nf(normal_form(a->l));
    case TypeKind::Sharp:
        return sharp_nf(normal_form(a->l));
    case TypeKind::Sum:
    case TypeKind::Prod:
    case TypeKind::Arrow:
    case TypeKind::UArrow:
        return make(a->kind, normal_form(a->l), normal_form(a->r));
    }
    return a;
}

bool subtype(const TypePtr &a, const TypePtr &b) { return sub_nf(normal_form(a), normal_form(b)); }

bool type_equiv(const TypePtr &a, const TypePtr &b) { return subtype(a, b) && subtype(b, a); }

bool is_pure_type(const TypePtr &a) {
    switch (a->kind) {
    case TypeKind::Unit:
    case TypeKind::Flat:
    case TypeKind::Arrow:
        return true;
    case TypeKind::Sum:
    case TypeKind::Prod:
        return is_pure_type(a->l) && is_pure_type(a->r);
    case TypeKind::Sharp:
    case TypeKind::UArrow:
        return false;
    }
    return false;
}

bool is_data_type(const TypePtr &a) {
    switch (a->kind) {
    case TypeKind::Unit:
        return true;
    case TypeKind::Flat:
    case TypeKind::Sharp:
        return is_data_type(a->l);
    case TypeKind::Sum:
    case TypeKind::Prod:
        return is_data_type(a->l) && is_data_type(a->r);
    case TypeKind::Arrow:
    case TypeKind::UArrow:
        return false;
    }
    return false;
}

std::vector<TermPtr> basis_of_type(const TypePtr &a) {
    switch (a->kind) {
    case TypeKind::Unit:
        return {void_term()};
    case TypeKind::Flat:
    case TypeKind::Sharp:
        return basis_of_type(a->l);
    case TypeKind::Sum: {
        std::vector<TermPtr> out;
        for (auto &b : basis_of_type(a->l)) {
            out.push_back(inl(b));
        }
        for (auto &b : basis_of_type(a->r)) {
            out.push_back(inr(b));
        }
        return out;
    }
    case TypeKind::Prod: {
        auto left = basis_of_type(a->l);
        auto right = basis_of_type(a->r);
        std::vector<TermPtr> out;
        for (auto &x : left) {
            for (auto &y : right) {
                out.push_back(pair(x, y));
            }
        }
        return out;
    }
    case TypeKind::Arrow:
    case TypeKind::UArrow:
        throw UnsupportedType("type " + to_string(a) + " has no finite basis");
    }
    return {};
}

std::string to_string(const Context &ctx) {
    std::string out;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += ctx[i].name + ":" + to_string(ctx[i].type);
    }
    return out;
}

}  // namespace ulc
