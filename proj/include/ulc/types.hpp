#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ulc/term.hpp"

namespace ulc {

enum class TypeKind : std::uint8_t { Unit, Flat, Sharp, Sum, Prod, Arrow, UArrow };

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
    TypeKind kind;
    TypePtr l;  // operand of Flat/Sharp, left of binary forms
    TypePtr r;
};

TypePtr unit_type();
TypePtr flat(TypePtr a);
TypePtr sharp(TypePtr a);
TypePtr sum_type(TypePtr a, TypePtr b);
TypePtr prod_type(TypePtr a, TypePtr b);
TypePtr pure_arrow(TypePtr a, TypePtr b);  // A -> B
TypePtr unit_arrow(TypePtr a, TypePtr b);  // A => B
TypePtr bool_type();                       // U + U
TypePtr oplus(TypePtr a, TypePtr b);       // #(A + B)
TypePtr otimes(TypePtr a, TypePtr b);      // #(A * B)

bool type_equal(const TypePtr &a, const TypePtr &b);  // syntactic
std::string to_string(const TypePtr &a);

// Representative of the equivalence class: flat pushed through sums,
// products, sharps and pure arrows; double flats and sharps collapsed;
// flat U = U. Remaining flats sit only on unitary arrows.
TypePtr normal_form(const TypePtr &a);

bool subtype(const TypePtr &a, const TypePtr &b);
bool type_equiv(const TypePtr &a, const TypePtr &b);

// Syntactic purity: U, flat and pure arrows are pure; sums and products
// when both sides are; sharp and unitary arrows never.
bool is_pure_type(const TypePtr &a);

// No arrows anywhere.
bool is_data_type(const TypePtr &a);

// Ordered basis of a data type; UnsupportedType if it contains an arrow.
std::vector<TermPtr> basis_of_type(const TypePtr &a);

struct Binding {
    std::string name;
    TypePtr type;
};
using Context = std::vector<Binding>;

std::string to_string(const Context &ctx);

}  // namespace ulc
