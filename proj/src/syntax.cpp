#include "ulc/syntax.hpp"

#include <cmath>
#include <optional>
#include <set>

#include "lexer.hpp"
#include "ulc/errors.hpp"

namespace ulc {

using detail::Tok;
using detail::TokenStream;

namespace {

const std::set<std::string> kReserved = {"lam",  "let",   "in",  "match", "inl",    "inr", "tt",
                                         "ff",   "if",    "then", "else", "church", "sqrt", "i"};

// Placeholder scope entry for the unnamed binder of an if branch.
const std::string kHidden = "\x01";

DistPtr ket(bool plus) {
    const double h = 1.0 / std::sqrt(2.0);
    return sum(scale(h, tt()), scale(plus ? h : -h, ff()));
}

class ScalarParser {
  public:
    explicit ScalarParser(TokenStream &ts) : ts_(ts) {}

    // Parses a scalar expression, or restores the position and returns
    // nullopt.
    std::optional<Scalar> try_parse() {
        auto m = ts_.mark();
        auto r = expr();
        if (!r) {
            ts_.reset(m);
        }
        return r;
    }

    // The value of every prefix f1 * ... * fk of a product chain, with
    // the position after it. Sums are not included: a coefficient with
    // a sum in it must be parenthesised.
    template <typename Mark>
    std::vector<std::pair<Scalar, Mark>> products() {
        std::vector<std::pair<Scalar, Mark>> out;
        auto acc = factor();
        if (!acc) {
            return out;
        }
        out.emplace_back(*acc, ts_.mark());
        while (ts_.at_sym("*") || ts_.at_sym("/")) {
            bool mul = ts_.next().text == "*";
            auto rhs = factor();
            if (!rhs || (!mul && std::abs(*rhs) == 0.0)) {
                break;
            }
            *acc = mul ? *acc * *rhs : *acc / *rhs;
            out.emplace_back(*acc, ts_.mark());
        }
        return out;
    }

  private:
    std::optional<Scalar> expr() {
        auto acc = term();
        if (!acc) {
            return std::nullopt;
        }
        while (ts_.at_sym("+") || ts_.at_sym("-")) {
            auto m = ts_.mark();
            bool plus = ts_.next().text == "+";
            auto rhs = term();
            if (!rhs) {
                ts_.reset(m);
                break;
            }
            *acc = plus ? *acc + *rhs : *acc - *rhs;
        }
        return acc;
    }

    std::optional<Scalar> term() {
        auto acc = factor();
        if (!acc) {
            return std::nullopt;
        }
        while (ts_.at_sym("*") || ts_.at_sym("/")) {
            auto m = ts_.mark();
            bool mul = ts_.next().text == "*";
            auto rhs = factor();
            if (!rhs) {
                ts_.reset(m);
                break;
            }
            if (!mul && std::abs(*rhs) == 0.0) {
                ts_.fail("division by zero in scalar");
            }
            *acc = mul ? *acc * *rhs : *acc / *rhs;
        }
        return acc;
    }

    std::optional<Scalar> factor() {
        auto m = ts_.mark();
        const auto &t = ts_.peek();
        if (t.kind == Tok::Number) {
            ts_.next();
            return Scalar{t.number, 0.0};
        }
        if (t.kind == Tok::ImagNumber) {
            ts_.next();
            return Scalar{0.0, t.number};
        }
        if (ts_.accept_ident("i")) {
            return Scalar{0.0, 1.0};
        }
        if (ts_.accept_sym("-")) {
            if (auto f = factor()) {
                return -*f;
            }
            ts_.reset(m);
            return std::nullopt;
        }
        if (ts_.accept_ident("sqrt")) {
            if (ts_.accept_sym("(")) {
                if (auto e = expr(); e && ts_.accept_sym(")")) {
                    return std::sqrt(*e);
                }
            }
            ts_.reset(m);
            return std::nullopt;
        }
        if (ts_.accept_sym("(")) {
            if (auto e = expr(); e && ts_.accept_sym(")")) {
                return e;
            }
            ts_.reset(m);
            return std::nullopt;
        }
        return std::nullopt;
    }

    TokenStream &ts_;
};

class TermParser {
  public:
    TermParser(TokenStream &ts, const Environment *env, std::set<std::string> shadow)
        : ts_(ts), env_(env), shadow_(std::move(shadow)) {}

    DistPtr dist() {
        DistPtr d = summand();
        while (true) {
            if (ts_.accept_sym("+")) {
                d = sum(d, summand());
            } else if (ts_.accept_sym("-")) {
                d = sum(d, scale(-1.0, summand()));
            } else {
                return d;
            }
        }
    }

  private:
    // c * s, where c is the longest product of scalar factors after which
    // the rest parses as a summand; otherwise a plain term.
    DistPtr summand() {
        using Mark = decltype(ts_.mark());
        auto m = ts_.mark();
        auto prefixes = ScalarParser(ts_).products<Mark>();
        std::optional<ParseError> first;
        for (auto it = prefixes.rbegin(); it != prefixes.rend(); ++it) {
            ts_.reset(it->second);
            if (!ts_.accept_sym("*")) {
                continue;
            }
            try {
                return scale(it->first, summand());
            } catch (const ParseError &e) {
                if (!first) {
                    first = e;
                }
            }
        }
        ts_.reset(m);
        if (first && !starts_term()) {
            throw *first;
        }
        return seq_term();
    }

    bool starts_term() const { return at_open_form() || starts_atom() || ts_.at_ident("inl") || ts_.at_ident("inr"); }

    DistPtr seq_term() {
        DistPtr head = app_term();
        if (ts_.accept_sym(";")) {
            DistPtr tail = dist();
            return lift_raw(Ctor::Seq, {head}, LiftShape{.body1 = tail});
        }
        return head;
    }

    bool at_open_form() const { return ts_.at_ident("lam") || ts_.at_ident("let") || ts_.at_ident("if"); }

    bool starts_atom() const {
        const auto &t = ts_.peek();
        if (t.kind == Tok::Ident) {
            static const std::set<std::string> stop = {"then", "else", "in", "lam", "let", "if", "inl", "inr", "i",
                                                       "sqrt"};
            return !stop.contains(t.text);
        }
        return ts_.at_sym("(") || ts_.at_sym("|+>") || ts_.at_sym("|->");
    }

    DistPtr app_term() {
        if (at_open_form()) {
            return open_form();
        }
        DistPtr f = prefix();
        while (true) {
            if (at_open_form()) {
                return lift_raw(Ctor::App, {f, open_form()});
            }
            if (!starts_atom()) {
                return f;
            }
            f = lift_raw(Ctor::App, {f, atom()});
        }
    }

    DistPtr prefix() {
        if (ts_.accept_ident("inl")) {
            return lift_raw(Ctor::Inl, {prefix()});
        }
        if (ts_.accept_ident("inr")) {
            return lift_raw(Ctor::Inr, {prefix()});
        }
        return atom();
    }

    std::string binder_name() {
        const auto &t = ts_.peek();
        if (t.kind != Tok::Ident || kReserved.contains(t.text)) {
            ts_.fail("expected a variable name");
        }
        return ts_.next().text;
    }

    DistPtr under(const std::vector<std::string> &names) {
        for (const auto &n : names) {
            scope_.push_back(n);
        }
        DistPtr body = dist();
        scope_.resize(scope_.size() - names.size());
        return body;
    }

    DistPtr open_form() {
        if (ts_.accept_ident("lam")) {
            std::vector<std::string> names{binder_name()};
            while (!ts_.at_sym(".")) {
                names.push_back(binder_name());
            }
            ts_.expect_sym(".");
            for (const auto &n : names) {
                scope_.push_back(n);
            }
            DistPtr body = dist();
            for (std::size_t k = names.size(); k-- > 0;) {
                scope_.pop_back();
                body = single(lam_raw(names[k], body));
            }
            return body;
        }
        if (ts_.accept_ident("let")) {
            ts_.expect_sym("(");
            std::string x = binder_name();
            ts_.expect_sym(",");
            std::string y = binder_name();
            ts_.expect_sym(")");
            ts_.expect_sym("=");
            DistPtr scrutinee = dist();
            ts_.expect_ident("in");
            DistPtr body = under({x, y});
            return lift_raw(Ctor::LetPair, {scrutinee}, LiftShape{.h1 = x, .h2 = y, .body1 = body});
        }
        ts_.expect_ident("if");
        DistPtr cond = dist();
        ts_.expect_ident("then");
        DistPtr s1 = under({kHidden});
        ts_.expect_ident("else");
        DistPtr s2 = under({kHidden});
        return lift_raw(Ctor::Match, {cond},
                        LiftShape{.h1 = "x1",
                                  .h2 = "x2",
                                  .body1 = single(seq(bvar(0), s1)),
                                  .body2 = single(seq(bvar(0), s2))});
    }

    DistPtr match_form() {
        DistPtr scrutinee = dist();
        ts_.expect_sym("{");
        ts_.expect_ident("inl");
        std::string x1 = binder_name();
        ts_.expect_sym("->");
        DistPtr s1 = under({x1});
        ts_.expect_sym("|");
        ts_.expect_ident("inr");
        std::string x2 = binder_name();
        ts_.expect_sym("->");
        DistPtr s2 = under({x2});
        ts_.expect_sym("}");
        return lift_raw(Ctor::Match, {scrutinee}, LiftShape{.h1 = x1, .h2 = x2, .body1 = s1, .body2 = s2});
    }

    DistPtr atom() {
        const auto &t = ts_.peek();
        if (ts_.accept_sym("|+>")) {
            return ket(true);
        }
        if (ts_.accept_sym("|->")) {
            return ket(false);
        }
        if (t.kind == Tok::Number && t.number == 0.0) {
            ts_.next();
            return zero();
        }
        if (ts_.accept_sym("(")) {
            if (ts_.accept_sym(")")) {
                return single(void_term());
            }
            DistPtr d = dist();
            if (ts_.accept_sym(",")) {
                DistPtr e = dist();
                ts_.expect_sym(")");
                try {
                    return lift_raw(Ctor::Pair, {d, e});
                } catch (const ShapeError &err) {
                    ts_.fail(err.what());
                }
            }
            ts_.expect_sym(")");
            return d;
        }
        if (t.kind != Tok::Ident) {
            ts_.fail("expected a term");
        }
        std::string name = t.text;
        if (name == "match") {
            ts_.next();
            return match_form();
        }
        if (name == "church") {
            ts_.next();
            const auto &n = ts_.peek();
            if (n.kind != Tok::Number || n.number < 0 || n.number != std::floor(n.number)) {
                ts_.fail("church expects a natural number");
            }
            ts_.next();
            return single(church(static_cast<unsigned>(n.number)));
        }
        if (name == "tt" || name == "ff") {
            ts_.next();
            return single(name == "tt" ? tt() : ff());
        }
        if (kReserved.contains(name)) {
            ts_.fail("unexpected keyword");
        }
        ts_.next();
        for (std::size_t k = scope_.size(); k-- > 0;) {
            if (scope_[k] == name) {
                return single(bvar(scope_.size() - 1 - k));
            }
        }
        if (env_ && !shadow_.contains(name)) {
            if (auto it = env_->find(name); it != env_->end()) {
                return it->second;
            }
        }
        return single(var(name));
    }

    TokenStream &ts_;
    const Environment *env_;
    std::set<std::string> shadow_;
    std::vector<std::string> scope_;
};

class TypeParser {
  public:
    explicit TypeParser(TokenStream &ts) : ts_(ts) {}

    TypePtr arrow() {
        TypePtr l = sum();
        if (ts_.accept_sym("->")) {
            return pure_arrow(l, arrow());
        }
        if (ts_.accept_sym("=>")) {
            return unit_arrow(l, arrow());
        }
        return l;
    }

  private:
    bool accept_infix(std::string_view sym, std::string_view inner) {
        if (ts_.accept_sym(sym)) {
            return true;
        }
        const bool word = inner == "x";
        if (ts_.at_sym("(") && (word ? ts_.at_ident(inner, 1) : ts_.at_sym(inner, 1)) && ts_.at_sym(")", 2)) {
            ts_.next();
            ts_.next();
            ts_.next();
            return true;
        }
        return false;
    }

    TypePtr sum() {
        TypePtr l = prod();
        while (true) {
            if (ts_.accept_sym("+")) {
                l = sum_type(l, prod());
            } else if (accept_infix("(+)", "+")) {
                l = oplus(l, prod());
            } else {
                return l;
            }
        }
    }

    TypePtr prod() {
        TypePtr l = prefix();
        while (true) {
            if (ts_.accept_sym("*")) {
                l = prod_type(l, prefix());
            } else if (accept_infix("(x)", "x")) {
                l = otimes(l, prefix());
            } else {
                return l;
            }
        }
    }

    TypePtr prefix() {
        if (ts_.accept_sym("#") || ts_.accept_ident("sharp")) {
            return sharp(prefix());
        }
        if (ts_.accept_sym("!") || ts_.accept_ident("flat")) {
            return flat(prefix());
        }
        if (ts_.accept_ident("U")) {
            return unit_type();
        }
        if (ts_.accept_ident("B") || ts_.accept_ident("Bool")) {
            return bool_type();
        }
        if (ts_.accept_sym("(")) {
            TypePtr t = arrow();
            ts_.expect_sym(")");
            return t;
        }
        ts_.fail("expected a type");
    }

    TokenStream &ts_;
};

Context context(TokenStream &ts) {
    Context ctx;
    if (!(ts.peek().kind == Tok::Ident && ts.at_sym(":", 1))) {
        return ctx;
    }
    while (true) {
        const auto &t = ts.peek();
        if (t.kind != Tok::Ident) {
            ts.fail("expected a variable name");
        }
        std::string name = ts.next().text;
        for (const auto &b : ctx) {
            if (b.name == name) {
                ts.fail("duplicate context variable " + name);
            }
        }
        ts.expect_sym(":");
        ctx.push_back({name, TypeParser(ts).arrow()});
        if (!ts.accept_sym(",")) {
            return ctx;
        }
    }
}

std::set<std::string> names_of(const Context &a, const Context &b = {}, const Context &c = {}) {
    std::set<std::string> out;
    for (const auto *ctx : {&a, &b, &c}) {
        for (const auto &x : *ctx) {
            out.insert(x.name);
        }
    }
    return out;
}

void expect_end(TokenStream &ts) {
    if (!ts.at_end()) {
        ts.fail("unexpected trailing input");
    }
}

// ---------------------------------------------------------------------
// Printing

bool refs_index(const DistPtr &d, std::size_t k);

bool refs_index(const TermPtr &t, std::size_t k) {
    switch (t->kind) {
    case Kind::BVar:
        return t->index == k;
    case Kind::FVar:
    case Kind::Void:
        return false;
    default:
        break;
    }
    std::size_t inner = k + (t->kind == Kind::LetPair ? 2 : (t->kind == Kind::Lam || t->kind == Kind::Match) ? 1 : 0);
    return (t->a && refs_index(t->a, k)) || (t->b && refs_index(t->b, k)) || (t->d1 && refs_index(t->d1, inner)) ||
           (t->d2 && refs_index(t->d2, inner));
}

bool refs_index(const DistPtr &d, std::size_t k) {
    switch (d->kind) {
    case DistKind::Zero:
        return false;
    case DistKind::Single:
        return refs_index(d->term, k);
    case DistKind::Sum:
        return refs_index(d->a, k) || refs_index(d->b, k);
    case DistKind::Scale:
        return refs_index(d->a, k);
    }
    return false;
}

// The tail s of a branch body of the form `x ; s` where s ignores x.
std::optional<DistPtr> if_branch(const DistPtr &body) {
    if (body->kind != DistKind::Single) {
        return std::nullopt;
    }
    const TermPtr &t = body->term;
    if (t->kind != Kind::Seq || t->a->kind != Kind::BVar || t->a->index != 0 || refs_index(t->d1, 0)) {
        return std::nullopt;
    }
    return t->d1;
}

class Printer {
  public:
    Printer(int digits, std::set<std::string> avoid) : digits_(digits), avoid_(std::move(avoid)) {
        avoid_.insert(kReserved.begin(), kReserved.end());
    }

    std::string dist(const DistPtr &d, bool trailing) {
        switch (d->kind) {
        case DistKind::Zero:
            return "0";
        case DistKind::Single:
            return term(d->term, 0, trailing);
        case DistKind::Scale:
            return summand(d, trailing);
        case DistKind::Sum: {
            std::string left = d->a->kind == DistKind::Sum ? dist(d->a, true) : summand(d->a, true);
            std::string right =
                d->b->kind == DistKind::Sum ? "(" + dist(d->b, false) + ")" : summand(d->b, trailing);
            return left + " + " + right;
        }
        }
        return "?";
    }

    std::string coefficient(Scalar c) {
        std::string s = format_scalar(c, digits_);
        if (s.find('+') != std::string::npos || s.find('-', 1) != std::string::npos) {
            return "(" + s + ")";
        }
        return s;
    }

    std::string summand(const DistPtr &d, bool trailing) {
        if (d->kind != DistKind::Scale) {
            return dist(d, trailing);
        }
        std::string head = coefficient(d->coef) + "·";
        const DistPtr &x = d->a;
        switch (x->kind) {
        case DistKind::Single:
            return head + term(x->term, 0, trailing);
        case DistKind::Zero:
            return head + "0";
        default:
            return head + "(" + dist(x, false) + ")";
        }
    }

    // prec 0: anything, 1: application head / argument of nothing open,
    // 2: atom.
    std::string term(const TermPtr &t, int prec, bool trailing) {
        auto open = [&](const std::string &s) { return (prec >= 1 || trailing) ? "(" + s + ")" : s; };
        switch (t->kind) {
        case Kind::FVar:
            return t->name;
        case Kind::BVar:
            if (t->index >= scope_.size()) {
                return "?" + std::to_string(t->index);
            }
            return scope_[scope_.size() - 1 - t->index];
        case Kind::Void:
            return "()";
        case Kind::Pair:
            return "(" + term(t->a, 0, false) + ", " + term(t->b, 0, false) + ")";
        case Kind::Inl:
        case Kind::Inr: {
            if (t->a->kind == Kind::Void) {
                return t->kind == Kind::Inl ? "tt" : "ff";
            }
            std::string s = (t->kind == Kind::Inl ? "inl " : "inr ") + term(t->a, 2, false);
            return prec >= 2 ? "(" + s + ")" : s;
        }
        case Kind::App: {
            std::string s = term(t->a, 1, true) + " " + term(t->b, 2, false);
            return prec >= 2 ? "(" + s + ")" : s;
        }
        case Kind::Lam: {
            std::string x = bind(t->name);
            std::string s = "lam " + x + ". " + dist(t->d1, false);
            unbind(1);
            return open(s);
        }
        case Kind::Seq:
            return open(term(t->a, 1, true) + " ; " + dist(t->d1, false));
        case Kind::LetPair: {
            std::string scrutinee = term(t->a, 0, false);
            std::string x = bind(t->name);
            std::string y = bind(t->name2);
            std::string s = "let (" + x + ", " + y + ") = " + scrutinee + " in " + dist(t->d1, false);
            unbind(2);
            return open(s);
        }
        case Kind::Match: {
            std::string scrutinee = term(t->a, 0, false);
            auto b1 = if_branch(t->d1);
            auto b2 = if_branch(t->d2);
            if (b1 && b2) {
                scope_.push_back(kHidden);
                std::string s1 = dist(*b1, false);
                std::string s2 = dist(*b2, false);
                scope_.pop_back();
                return open("if " + scrutinee + " then " + s1 + " else " + s2);
            }
            std::string x1 = bind(t->name);
            std::string s1 = dist(t->d1, false);
            unbind(1);
            std::string x2 = bind(t->name2);
            std::string s2 = dist(t->d2, false);
            unbind(1);
            return "match " + scrutinee + " { inl " + x1 + " -> " + s1 + " | inr " + x2 + " -> " + s2 + " }";
        }
        }
        return "?";
    }

  private:
    std::string bind(const std::string &hint) {
        std::set<std::string> taken = avoid_;
        taken.insert(scope_.begin(), scope_.end());
        std::string base = hint;
        if (base.empty() || base == kHidden) {
            base = "x";
        }
        std::string name = fresh_name(base, taken);
        scope_.push_back(name);
        return name;
    }

    void unbind(std::size_t n) { scope_.resize(scope_.size() - n); }

    int digits_;
    std::set<std::string> avoid_;
    std::vector<std::string> scope_;
};

}  // namespace

DistPtr parse_dist(std::string_view src, const Environment *env) {
    TokenStream ts(detail::tokenize(src));
    DistPtr d = TermParser(ts, env, {}).dist();
    expect_end(ts);
    return d;
}

TermPtr parse_term(std::string_view src, const Environment *env) {
    DistPtr d = parse_dist(src, env);
    if (d->kind != DistKind::Single) {
        throw ParseError("expected a single pure term", 1, 1);
    }
    return d->term;
}

TypePtr parse_type(std::string_view src) {
    TokenStream ts(detail::tokenize(src));
    TypePtr t = TypeParser(ts).arrow();
    expect_end(ts);
    return t;
}

Context parse_context(std::string_view src) {
    TokenStream ts(detail::tokenize(src));
    Context ctx = context(ts);
    expect_end(ts);
    return ctx;
}

JudgmentText parse_judgment(std::string_view src, const Environment *env) {
    TokenStream ts(detail::tokenize(src));
    JudgmentText out;
    out.context = context(ts);
    ts.expect_sym("|-");
    out.term = TermParser(ts, env, names_of(out.context)).dist();
    ts.expect_sym(":");
    out.type = TypeParser(ts).arrow();
    expect_end(ts);
    return out;
}

OrthogonalityText parse_orthogonality(std::string_view src, const Environment *env) {
    TokenStream ts(detail::tokenize(src));
    OrthogonalityText out;
    out.shared = context(ts);
    ts.expect_sym("|-");
    ts.expect_sym("<");
    auto side = [&](Context &ctx, DistPtr &term) {
        if (ts.peek().kind == Tok::Ident && ts.at_sym(":", 1)) {
            ctx = context(ts);
            ts.expect_sym("|");
        } else {
            ts.accept_sym("|");
        }
        term = TermParser(ts, env, names_of(out.shared, ctx)).dist();
    };
    side(out.left_context, out.left);
    ts.expect_sym("_|_");
    side(out.right_context, out.right);
    ts.expect_sym(">");
    ts.expect_sym(":");
    out.type = TypeParser(ts).arrow();
    expect_end(ts);
    return out;
}

std::string to_string(const TermPtr &t, int digits) {
    Printer p(digits, free_vars(t));
    return p.term(t, 0, false);
}

std::string to_string(const DistPtr &d, int digits) {
    Printer p(digits, free_vars(d));
    return p.dist(d, false);
}

std::string to_string(const Canonical &c, int digits) {
    if (c.empty()) {
        return "0";
    }
    Printer p(digits, free_vars(c));
    std::string out;
    const auto &items = c.summands();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) {
            out += " + ";
        }
        out += p.coefficient(items[i].coef) + "·" + p.term(items[i].term, 0, i + 1 < items.size());
    }
    return out;
}

}  // namespace ulc
