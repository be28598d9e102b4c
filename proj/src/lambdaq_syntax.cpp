#include <functional>

#include "lexer.hpp"
#include "ulc/errors.hpp"
#include "ulc/lambdaq.hpp"

namespace ulc {

using detail::Tok;
using detail::TokenStream;

namespace {

QTypePtr make_type(QType t) { return std::make_shared<const QType>(std::move(t)); }
QTermPtr make_term(QTerm t) { return std::make_shared<const QTerm>(std::move(t)); }

}  // namespace

// ---------------------------------------------------------------- types

QTypePtr q_unit() {
    static const QTypePtr t = make_type(QType{.kind = QTypeKind::Unit});
    return t;
}

QTypePtr q_bit() {
    static const QTypePtr t = make_type(QType{.kind = QTypeKind::Bit});
    return t;
}

QTypePtr q_qbit() {
    static const QTypePtr t = make_type(QType{.kind = QTypeKind::Qbit});
    return t;
}

QTypePtr q_arrow(QTypePtr a, QTypePtr b) { return make_type(QType{.kind = QTypeKind::Arrow, .l = a, .r = b}); }
QTypePtr q_prod(QTypePtr a, QTypePtr b) { return make_type(QType{.kind = QTypeKind::Prod, .l = a, .r = b}); }
QTypePtr q_lolli(QTypePtr a, QTypePtr b) { return make_type(QType{.kind = QTypeKind::Lolli, .l = a, .r = b}); }
QTypePtr q_tensor(QTypePtr a, QTypePtr b) { return make_type(QType{.kind = QTypeKind::Tensor, .l = a, .r = b}); }

bool is_quantum_type(const QTypePtr &a) {
    switch (a->kind) {
    case QTypeKind::Qbit:
        return true;
    case QTypeKind::Tensor:
        return is_quantum_type(a->l) && is_quantum_type(a->r);
    default:
        return false;
    }
}

bool is_classical_type(const QTypePtr &a) {
    switch (a->kind) {
    case QTypeKind::Unit:
    case QTypeKind::Bit:
        return true;
    case QTypeKind::Arrow:
    case QTypeKind::Prod:
        return is_classical_type(a->l) && is_classical_type(a->r);
    case QTypeKind::Lolli:
        return is_quantum_type(a->l) && is_quantum_type(a->r);
    default:
        return false;
    }
}

bool q_type_equal(const QTypePtr &a, const QTypePtr &b) {
    if (a->kind != b->kind) {
        return false;
    }
    switch (a->kind) {
    case QTypeKind::Unit:
    case QTypeKind::Bit:
    case QTypeKind::Qbit:
        return true;
    case QTypeKind::Meta:
        return a->meta == b->meta;
    default:
        return q_type_equal(a->l, b->l) && q_type_equal(a->r, b->r);
    }
}

namespace {

// 0: arrows, 1: products and tensors, 2: atoms.
std::string type_string(const QTypePtr &a, int prec) {
    auto wrap = [&](std::string s, int own) { return own < prec ? "(" + s + ")" : s; };
    switch (a->kind) {
    case QTypeKind::Unit:
        return "U";
    case QTypeKind::Bit:
        return "bit";
    case QTypeKind::Qbit:
        return "qbit";
    case QTypeKind::Meta:
        return "?" + std::to_string(a->meta);
    case QTypeKind::Arrow:
        return wrap(type_string(a->l, 1) + " -> " + type_string(a->r, 0), 0);
    case QTypeKind::Lolli:
        return wrap(type_string(a->l, 1) + " -o " + type_string(a->r, 0), 0);
    case QTypeKind::Prod:
        return wrap(type_string(a->l, 1) + " * " + type_string(a->r, 2), 1);
    case QTypeKind::Tensor:
        return wrap(type_string(a->l, 1) + " (x) " + type_string(a->r, 2), 1);
    }
    return "?";
}

bool at_tensor_op(const TokenStream &ts) {
    return ts.at_sym("(x)") || (ts.at_sym("(") && ts.at_ident("x", 1) && ts.at_sym(")", 2));
}

void skip_tensor_op(TokenStream &ts) {
    if (!ts.accept_sym("(x)")) {
        ts.next();
        ts.next();
        ts.next();
    }
}

class QTypeParser {
  public:
    explicit QTypeParser(TokenStream &ts) : ts_(ts) {}

    QTypePtr type() {
        QTypePtr l = product();
        if (ts_.accept_sym("->")) {
            return q_arrow(l, type());
        }
        if (ts_.accept_sym("-o")) {
            return q_lolli(l, type());
        }
        return l;
    }

  private:
    QTypePtr product() {
        QTypePtr acc = atom();
        while (true) {
            if (at_tensor_op(ts_)) {
                skip_tensor_op(ts_);
                acc = q_tensor(acc, atom());
            } else if (ts_.accept_sym("*")) {
                acc = q_prod(acc, atom());
            } else {
                return acc;
            }
        }
    }

    QTypePtr atom() {
        if (ts_.accept_ident("U") || ts_.accept_ident("unit")) {
            return q_unit();
        }
        if (ts_.accept_ident("bit")) {
            return q_bit();
        }
        if (ts_.accept_ident("qbit")) {
            return q_qbit();
        }
        if (ts_.accept_sym("(")) {
            QTypePtr t = type();
            ts_.expect_sym(")");
            return t;
        }
        ts_.fail("expected a lambda_Q type");
    }

    TokenStream &ts_;
};

}  // namespace

std::string to_string(const QTypePtr &a) { return type_string(a, 0); }

QTypePtr parse_qtype(std::string_view src) {
    TokenStream ts(detail::tokenize(src));
    QTypePtr t = QTypeParser(ts).type();
    if (!ts.at_end()) {
        ts.fail("unexpected input after type");
    }
    return t;
}

// ---------------------------------------------------------------- terms

QTermPtr q_var(const std::string &x) { return make_term(QTerm{.kind = QKind::Var, .name = x}); }

QTermPtr q_star() {
    static const QTermPtr t = make_term(QTerm{.kind = QKind::Star});
    return t;
}

QTermPtr q_true() {
    static const QTermPtr t = make_term(QTerm{.kind = QKind::True});
    return t;
}

QTermPtr q_false() {
    static const QTermPtr t = make_term(QTerm{.kind = QKind::False});
    return t;
}

QTermPtr q_lam(const std::string &x, QTermPtr body, QTypePtr annot) {
    return make_term(QTerm{.kind = QKind::Lam, .name = x, .annot = std::move(annot), .a = std::move(body)});
}

QTermPtr q_lamq(const std::string &x, QTermPtr body, QTypePtr annot) {
    return make_term(QTerm{.kind = QKind::LamQ, .name = x, .annot = std::move(annot), .a = std::move(body)});
}

QTermPtr q_app(QTermPtr f, QTermPtr a) {
    return make_term(QTerm{.kind = QKind::App, .a = std::move(f), .b = std::move(a)});
}

QTermPtr q_appq(QTermPtr f, QTermPtr a) {
    return make_term(QTerm{.kind = QKind::AppQ, .a = std::move(f), .b = std::move(a)});
}

QTermPtr q_pair(QTermPtr a, QTermPtr b) {
    return make_term(QTerm{.kind = QKind::Pair, .a = std::move(a), .b = std::move(b)});
}

QTermPtr q_fst(QTermPtr t) { return make_term(QTerm{.kind = QKind::Fst, .a = std::move(t)}); }
QTermPtr q_snd(QTermPtr t) { return make_term(QTerm{.kind = QKind::Snd, .a = std::move(t)}); }

QTermPtr q_if(QTermPtr c, QTermPtr t, QTermPtr e) {
    return make_term(QTerm{.kind = QKind::If, .a = std::move(c), .b = std::move(t), .c = std::move(e)});
}

QTermPtr q_tensor(QTermPtr a, QTermPtr b) {
    return make_term(QTerm{.kind = QKind::Tensor, .a = std::move(a), .b = std::move(b)});
}

QTermPtr q_let_tensor(const std::string &x, const std::string &y, QTermPtr s, QTermPtr body) {
    return make_term(
        QTerm{.kind = QKind::LetTensor, .name = x, .name2 = y, .a = std::move(s), .b = std::move(body)});
}

QTermPtr q_new(QTermPtr t) { return make_term(QTerm{.kind = QKind::New, .a = std::move(t)}); }

QTermPtr q_gate(const std::string &gate, QTermPtr t) {
    return make_term(QTerm{.kind = QKind::Gate, .name = gate, .a = std::move(t)});
}

QTermPtr q_ctl(QTermPtr t, bool on_one) {
    return make_term(QTerm{.kind = on_one ? QKind::Ctl1 : QKind::Ctl, .a = std::move(t)});
}

bool is_qvalue(const QTermPtr &t) {
    switch (t->kind) {
    case QKind::Var:
    case QKind::Star:
    case QKind::True:
    case QKind::False:
    case QKind::Lam:
    case QKind::LamQ:
        return true;
    case QKind::Pair:
    case QKind::Tensor:
        return is_qvalue(t->a) && is_qvalue(t->b);
    case QKind::Ctl:
    case QKind::Ctl1:
        return is_qvalue(t->a);
    default:
        return false;
    }
}

namespace {

void collect_free(const QTermPtr &t, std::set<std::string> &bound, std::set<std::string> &out) {
    auto under = [&](const QTermPtr &body, const std::vector<std::string> &names) {
        std::vector<std::string> added;
        for (const auto &n : names) {
            if (bound.insert(n).second) {
                added.push_back(n);
            }
        }
        collect_free(body, bound, out);
        for (const auto &n : added) {
            bound.erase(n);
        }
    };
    switch (t->kind) {
    case QKind::Var:
        if (!bound.contains(t->name)) {
            out.insert(t->name);
        }
        return;
    case QKind::Lam:
    case QKind::LamQ:
        under(t->a, {t->name});
        return;
    case QKind::LetTensor:
        collect_free(t->a, bound, out);
        under(t->b, {t->name, t->name2});
        return;
    default:
        for (const auto *p : {&t->a, &t->b, &t->c}) {
            if (*p) {
                collect_free(*p, bound, out);
            }
        }
    }
}

QTermPtr with_children(const QTermPtr &t, QTermPtr a, QTermPtr b, QTermPtr c) {
    QTerm copy = *t;
    copy.a = std::move(a);
    copy.b = std::move(b);
    copy.c = std::move(c);
    return make_term(std::move(copy));
}

// Renaming environment for alpha-equivalence: parallel stacks of binders.
using Scope = std::vector<std::pair<std::string, std::string>>;

bool alpha(const QTermPtr &a, const QTermPtr &b, Scope &scope) {
    if (a->kind != b->kind) {
        return false;
    }
    switch (a->kind) {
    case QKind::Var:
        for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
            bool la = it->first == a->name, lb = it->second == b->name;
            if (la || lb) {
                return la && lb;
            }
        }
        return a->name == b->name;
    case QKind::Star:
    case QKind::True:
    case QKind::False:
        return true;
    case QKind::Lam:
    case QKind::LamQ: {
        scope.emplace_back(a->name, b->name);
        bool r = alpha(a->a, b->a, scope);
        scope.pop_back();
        return r;
    }
    case QKind::LetTensor: {
        if (!alpha(a->a, b->a, scope)) {
            return false;
        }
        scope.emplace_back(a->name, b->name);
        scope.emplace_back(a->name2, b->name2);
        bool r = alpha(a->b, b->b, scope);
        scope.pop_back();
        scope.pop_back();
        return r;
    }
    case QKind::Gate:
        if (a->name != b->name) {
            return false;
        }
        break;
    default:
        break;
    }
    for (auto [pa, pb] : {std::pair{&a->a, &b->a}, std::pair{&a->b, &b->b}, std::pair{&a->c, &b->c}}) {
        if (static_cast<bool>(*pa) != static_cast<bool>(*pb)) {
            return false;
        }
        if (*pa && !alpha(*pa, *pb, scope)) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::set<std::string> q_free_vars(const QTermPtr &t) {
    std::set<std::string> bound, out;
    collect_free(t, bound, out);
    return out;
}

bool q_alpha_equal(const QTermPtr &a, const QTermPtr &b) {
    Scope scope;
    return alpha(a, b, scope);
}

QTermPtr q_substitute(const QTermPtr &t, const std::string &x, const QTermPtr &u) {
    switch (t->kind) {
    case QKind::Var:
        return t->name == x ? u : t;
    case QKind::Star:
    case QKind::True:
    case QKind::False:
        return t;
    case QKind::Lam:
    case QKind::LamQ: {
        if (t->name == x) {
            return t;
        }
        auto fu = q_free_vars(u);
        QTerm copy = *t;
        QTermPtr body = t->a;
        if (fu.contains(t->name)) {
            auto avoid = fu;
            avoid.merge(q_free_vars(body));
            avoid.insert(x);
            copy.name = fresh_name(t->name, avoid);
            body = q_substitute(body, t->name, q_var(copy.name));
        }
        copy.a = q_substitute(body, x, u);
        return make_term(std::move(copy));
    }
    case QKind::LetTensor: {
        QTerm copy = *t;
        copy.a = q_substitute(t->a, x, u);
        if (t->name == x || t->name2 == x) {
            return make_term(std::move(copy));
        }
        auto fu = q_free_vars(u);
        QTermPtr body = t->b;
        auto avoid = fu;
        avoid.merge(q_free_vars(body));
        avoid.insert(x);
        avoid.insert(t->name);
        avoid.insert(t->name2);
        for (auto *n : {&copy.name, &copy.name2}) {
            if (fu.contains(*n)) {
                std::string fresh = fresh_name(*n, avoid);
                avoid.insert(fresh);
                body = q_substitute(body, *n, q_var(fresh));
                *n = fresh;
            }
        }
        copy.b = q_substitute(body, x, u);
        return make_term(std::move(copy));
    }
    default: {
        auto sub = [&](const QTermPtr &p) { return p ? q_substitute(p, x, u) : p; };
        return with_children(t, sub(t->a), sub(t->b), sub(t->c));
    }
    }
}

std::size_t q_size(const QTermPtr &t) {
    std::size_t n = 1;
    for (const auto *p : {&t->a, &t->b, &t->c}) {
        if (*p) {
            n += q_size(*p);
        }
    }
    return n;
}

// ---------------------------------------------------------------- parser

namespace {

const std::set<std::string> kQReserved = {"lam", "lamq", "if",  "then", "else", "let", "in",  "new",
                                          "ctl", "ctl1", "fst", "snd",  "pi1",  "pi2", "tt",  "ff"};

class QTermParser {
  public:
    QTermParser(TokenStream &ts, const GateTable &gates) : ts_(ts), gates_(gates) {}

    QTermPtr term() {
        if (ts_.accept_ident("lam")) {
            return binder(false);
        }
        if (ts_.accept_ident("lamq")) {
            return binder(true);
        }
        if (ts_.accept_ident("if")) {
            QTermPtr c = term();
            ts_.expect_ident("then");
            QTermPtr t = term();
            ts_.expect_ident("else");
            return q_if(c, t, term());
        }
        if (ts_.accept_ident("let")) {
            std::string x = ident();
            if (!at_tensor_op(ts_)) {
                ts_.fail("expected '(x)' in let");
            }
            skip_tensor_op(ts_);
            std::string y = ident();
            ts_.expect_sym("=");
            QTermPtr s = term();
            ts_.expect_ident("in");
            return q_let_tensor(x, y, s, term());
        }
        return tensor();
    }

  private:
    std::string ident() {
        const auto &t = ts_.peek();
        if (t.kind != Tok::Ident || kQReserved.contains(t.text)) {
            ts_.fail("expected a variable");
        }
        return ts_.next().text;
    }

    QTermPtr binder(bool quantum) {
        std::string x = ident();
        QTypePtr annot;
        if (ts_.accept_sym(":")) {
            annot = QTypeParser(ts_).type();
        }
        ts_.expect_sym(".");
        QTermPtr body = term();
        return quantum ? q_lamq(x, body, annot) : q_lam(x, body, annot);
    }

    bool at_binder() const { return ts_.at_ident("lam") || ts_.at_ident("lamq") || ts_.at_ident("if") || ts_.at_ident("let"); }

    // A trailing binder form extends as far as possible, as in `f lam x. e`.
    QTermPtr operand(const std::function<QTermPtr()> &next) { return at_binder() ? term() : next(); }

    QTermPtr tensor() {
        QTermPtr acc = at();
        while (at_tensor_op(ts_)) {
            skip_tensor_op(ts_);
            acc = q_tensor(acc, operand([this] { return at(); }));
        }
        return acc;
    }

    QTermPtr at() {
        QTermPtr acc = application();
        while (ts_.accept_sym("@")) {
            acc = q_appq(acc, operand([this] { return application(); }));
        }
        return acc;
    }

    bool starts_atom() const {
        if (at_tensor_op(ts_)) {
            return false;
        }
        const auto &t = ts_.peek();
        if (t.kind == Tok::Ident) {
            static const std::set<std::string> stop = {"then", "else", "in"};
            return !stop.contains(t.text);
        }
        return ts_.at_sym("(") || ts_.at_sym("*");
    }

    QTermPtr application() {
        QTermPtr f = atom();
        while (starts_atom()) {
            if (at_binder()) {
                return q_app(f, term());
            }
            f = q_app(f, atom());
        }
        return f;
    }

    QTermPtr atom() {
        const auto &t = ts_.peek();
        if (ts_.accept_sym("*")) {
            return q_star();
        }
        if (ts_.accept_sym("(")) {
            if (ts_.accept_sym(")")) {
                return q_star();
            }
            QTermPtr first = term();
            if (ts_.accept_sym(",")) {
                QTermPtr second = term();
                ts_.expect_sym(")");
                return q_pair(first, second);
            }
            ts_.expect_sym(")");
            return first;
        }
        if (t.kind != Tok::Ident) {
            ts_.fail("expected a lambda_Q term");
        }
        if (ts_.accept_ident("tt")) {
            return q_true();
        }
        if (ts_.accept_ident("ff")) {
            return q_false();
        }
        if (ts_.accept_ident("fst") || ts_.accept_ident("pi1")) {
            return q_fst(atom());
        }
        if (ts_.accept_ident("snd") || ts_.accept_ident("pi2")) {
            return q_snd(atom());
        }
        if (ts_.accept_ident("new")) {
            return q_new(parenthesised());
        }
        if (ts_.accept_ident("ctl")) {
            return q_ctl(parenthesised(), false);
        }
        if (ts_.accept_ident("ctl1")) {
            return q_ctl(parenthesised(), true);
        }
        if (at_binder()) {
            return term();
        }
        if (gates_.contains(t.text) && ts_.at_sym("(", 1)) {
            std::string g = ts_.next().text;
            return q_gate(g, parenthesised());
        }
        return q_var(ident());
    }

    QTermPtr parenthesised() {
        ts_.expect_sym("(");
        QTermPtr t = term();
        ts_.expect_sym(")");
        return t;
    }

    TokenStream &ts_;
    const GateTable &gates_;
};

// 0: binders, 1: tensor, 2: @, 3: application, 4: atoms.
std::string term_string(const QTermPtr &t, int prec) {
    auto wrap = [&](std::string s, int own) { return own < prec ? "(" + s + ")" : s; };
    auto annot = [](const QTermPtr &b) { return b->annot ? ":" + to_string(b->annot) : std::string(); };
    switch (t->kind) {
    case QKind::Var:
        return t->name;
    case QKind::Star:
        return "()";
    case QKind::True:
        return "tt";
    case QKind::False:
        return "ff";
    case QKind::Lam:
        return wrap("lam " + t->name + annot(t) + ". " + term_string(t->a, 0), 0);
    case QKind::LamQ:
        return wrap("lamq " + t->name + annot(t) + ". " + term_string(t->a, 0), 0);
    case QKind::If:
        return wrap("if " + term_string(t->a, 0) + " then " + term_string(t->b, 0) + " else " +
                        term_string(t->c, 0),
                    0);
    case QKind::LetTensor:
        return wrap("let " + t->name + " (x) " + t->name2 + " = " + term_string(t->a, 0) + " in " +
                        term_string(t->b, 0),
                    0);
    case QKind::Tensor:
        return wrap(term_string(t->a, 1) + " (x) " + term_string(t->b, 2), 1);
    case QKind::AppQ:
        return wrap(term_string(t->a, 2) + " @ " + term_string(t->b, 3), 2);
    case QKind::App:
        return wrap(term_string(t->a, 3) + " " + term_string(t->b, 4), 3);
    case QKind::Pair:
        return "(" + term_string(t->a, 0) + ", " + term_string(t->b, 0) + ")";
    case QKind::Fst:
        return wrap("fst " + term_string(t->a, 4), 3);
    case QKind::Snd:
        return wrap("snd " + term_string(t->a, 4), 3);
    case QKind::New:
        return "new(" + term_string(t->a, 0) + ")";
    case QKind::Gate:
        return t->name + "(" + term_string(t->a, 0) + ")";
    case QKind::Ctl:
        return "ctl(" + term_string(t->a, 0) + ")";
    case QKind::Ctl1:
        return "ctl1(" + term_string(t->a, 0) + ")";
    }
    return "?";
}

}  // namespace

QTermPtr parse_qterm(std::string_view src, const GateTable *gates) {
    static const GateTable standard = GateTable::standard();
    TokenStream ts(detail::tokenize(src));
    QTermPtr t = QTermParser(ts, gates ? *gates : standard).term();
    if (!ts.at_end()) {
        ts.fail("unexpected input after term");
    }
    return t;
}

std::string to_string(const QTermPtr &t) { return term_string(t, 0); }

}  // namespace ulc
