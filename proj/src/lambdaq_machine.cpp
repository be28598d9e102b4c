#include <cmath>
#include <json.hpp>

#include "ulc/errors.hpp"
#include "ulc/lambdaq.hpp"

namespace ulc {

using nlohmann::json;

// ---------------------------------------------------------------- gates

bool is_unitary(const Gate &g, double tol) {
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            Scalar s = 0.0;
            for (int k = 0; k < 2; ++k) {
                s += std::conj(g[k][i]) * g[k][j];
            }
            if (!near(s, i == j ? 1.0 : 0.0, tol)) {
                return false;
            }
        }
    }
    return true;
}

Gate phase_gate(double theta) { return Gate{{{1.0, 0.0}, {0.0, std::polar(1.0, theta)}}}; }

GateTable GateTable::standard() {
    const double h = 1.0 / std::sqrt(2.0);
    const Scalar i{0.0, 1.0};
    GateTable t;
    t.add("H", Gate{{{h, h}, {h, -h}}});
    t.add("X", Gate{{{0.0, 1.0}, {1.0, 0.0}}});
    t.add("Y", Gate{{{0.0, -i}, {i, 0.0}}});
    t.add("Z", Gate{{{1.0, 0.0}, {0.0, -1.0}}});
    t.add("S", phase_gate(M_PI / 2));
    t.add("T", phase_gate(M_PI / 4));
    t.add("I", Gate{{{1.0, 0.0}, {0.0, 1.0}}});
    return t;
}

void GateTable::add(const std::string &name, const Gate &g, bool check_unitary) {
    for (const auto &row : g) {
        for (auto x : row) {
            if (!is_finite(x)) {
                throw DomainError("gate " + name + " has a non-finite entry");
            }
        }
    }
    if (check_unitary && !is_unitary(g)) {
        throw DomainError("gate " + name + " is not unitary");
    }
    gates_[name] = g;
}

const Gate &GateTable::at(const std::string &name) const {
    auto it = gates_.find(name);
    if (it == gates_.end()) {
        throw DomainError("unknown gate " + name);
    }
    return it->second;
}

std::vector<std::string> GateTable::names() const {
    std::vector<std::string> out;
    for (const auto &[k, v] : gates_) {
        out.push_back(k);
    }
    return out;
}

namespace {

Scalar scalar_of(const json &j) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_object()) {
        return {j.value("re", 0.0), j.value("im", 0.0)};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw DomainError("expected a number, [re, im] or {\"re\": .., \"im\": ..}, got " + j.dump());
}

json scalar_json(Scalar s) { return json{{"re", s.real()}, {"im", s.imag()}}; }

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw DomainError(std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace

GateTable parse_gate_table(std::string_view text, GateTable base, bool check_unitary) {
    json j = parse_json(text);
    if (j.contains("gates")) {
        j = j["gates"];
    }
    if (!j.is_object()) {
        throw DomainError("a gate table is a JSON object of 2x2 matrices");
    }
    for (const auto &[name, m] : j.items()) {
        if (!m.is_array() || m.size() != 2 || !m[0].is_array() || !m[1].is_array() || m[0].size() != 2 ||
            m[1].size() != 2) {
            throw DomainError("gate " + name + " is not a 2x2 matrix");
        }
        Gate g{};
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                g[r][c] = scalar_of(m[r][c]);
            }
        }
        base.add(name, g, check_unitary);
    }
    return base;
}

// ---------------------------------------------------------------- state

std::size_t QuantumState::qubits() const {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < amplitudes.size()) {
        ++n;
    }
    return n;
}

std::string to_string(const QuantumState &q) {
    const std::size_t n = q.qubits();
    std::string out;
    for (std::size_t i = 0; i < q.amplitudes.size(); ++i) {
        if (near_zero(q.amplitudes[i])) {
            continue;
        }
        std::string ket;
        for (std::size_t w = 1; w <= n; ++w) {
            ket += ((i >> (n - w)) & 1U) ? '1' : '0';
        }
        out += (out.empty() ? "" : " + ") + format_scalar(q.amplitudes[i]) + "|" + ket + ">";
    }
    return out.empty() ? "0" : out;
}

void add_qubit(QuantumState &q, bool bit) {
    std::vector<Scalar> out(q.amplitudes.size() * 2, Scalar{0.0, 0.0});
    for (std::size_t i = 0; i < q.amplitudes.size(); ++i) {
        out[2 * i + (bit ? 1 : 0)] = q.amplitudes[i];
    }
    q.amplitudes = std::move(out);
}

void apply_gate(QuantumState &q, std::size_t wire, const Gate &g,
                const std::vector<std::pair<std::size_t, bool>> &controls) {
    const std::size_t n = q.qubits();
    if (wire < 1 || wire > n) {
        throw DomainError("wire " + std::to_string(wire) + " out of range");
    }
    auto mask = [n](std::size_t w) { return std::size_t{1} << (n - w); };
    const std::size_t target = mask(wire);
    for (std::size_t i = 0; i < q.amplitudes.size(); ++i) {
        if (i & target) {
            continue;
        }
        bool enabled = true;
        for (auto [w, bit] : controls) {
            if (((i & mask(w)) != 0) != bit) {
                enabled = false;
                break;
            }
        }
        if (!enabled) {
            continue;
        }
        Scalar a0 = q.amplitudes[i], a1 = q.amplitudes[i | target];
        q.amplitudes[i] = g[0][0] * a0 + g[0][1] * a1;
        q.amplitudes[i | target] = g[1][0] * a0 + g[1][1] * a1;
    }
}

void validate_program(const Program &p) {
    const auto &amps = p.state.amplitudes;
    if (amps.empty() || (amps.size() & (amps.size() - 1)) != 0) {
        throw DomainError("the number of amplitudes must be a power of two");
    }
    const std::size_t n = p.state.qubits();
    if (p.wires.size() != n) {
        throw DomainError("the state has " + std::to_string(n) + " qubits but " + std::to_string(p.wires.size()) +
                          " wires are named");
    }
    std::vector<bool> seen(n + 1, false);
    for (const auto &[x, w] : p.wires) {
        if (w < 1 || w > n || seen[w]) {
            throw DomainError("wire index " + std::to_string(w) + " of " + x + " is out of range or repeated");
        }
        seen[w] = true;
    }
    const auto free = q_free_vars(p.term);
    for (const auto &x : free) {
        if (!p.wires.contains(x)) {
            throw DomainError("free variable " + x + " is not a wire");
        }
    }
    for (const auto &[x, w] : p.wires) {
        if (!free.contains(x)) {
            throw DomainError("wire " + x + " does not occur in the term");
        }
    }
    double norm2 = 0.0;
    for (auto a : amps) {
        if (!is_finite(a)) {
            throw DomainError("non-finite amplitude");
        }
        norm2 += std::norm(a);
    }
    if (std::abs(norm2 - 1.0) > kUnitaryTolerance) {
        throw DomainError("the state does not have unit norm");
    }
}

// ---------------------------------------------------------------- reduction

namespace {

constexpr std::size_t kControlledFuel = 100000;

void all_names(const QTermPtr &t, std::set<std::string> &out) {
    if (!t->name.empty()) {
        out.insert(t->name);
    }
    if (!t->name2.empty()) {
        out.insert(t->name2);
    }
    for (const auto *p : {&t->a, &t->b, &t->c}) {
        if (*p) {
            all_names(*p, out);
        }
    }
}

QTermPtr rebuild(const QTermPtr &t, QTermPtr a, QTermPtr b = nullptr, QTermPtr c = nullptr) {
    QTerm copy = *t;
    copy.a = std::move(a);
    if (b) {
        copy.b = std::move(b);
    }
    if (c) {
        copy.c = std::move(c);
    }
    return std::make_shared<const QTerm>(std::move(copy));
}

class Machine {
  public:
    Machine(Program &p, const GateTable &gates) : p_(p), gates_(gates) {}

    QTermPtr step(const QTermPtr &t) {
        switch (t->kind) {
        case QKind::App:
            if (!is_qvalue(t->b)) {
                return rebuild(t, t->a, step(t->b));
            }
            if (!is_qvalue(t->a)) {
                return rebuild(t, step(t->a), t->b);
            }
            if (t->a->kind == QKind::Lam) {
                return q_substitute(t->a->a, t->a->name, t->b);
            }
            stuck(t, "applying a non-function");
        case QKind::AppQ:
            if (!is_qvalue(t->b)) {
                return rebuild(t, t->a, step(t->b));
            }
            if (!is_qvalue(t->a)) {
                return rebuild(t, step(t->a), t->b);
            }
            if (t->a->kind == QKind::LamQ) {
                return q_substitute(t->a->a, t->a->name, t->b);
            }
            if (t->a->kind == QKind::Ctl || t->a->kind == QKind::Ctl1) {
                return controlled(t);
            }
            stuck(t, "applying a non-quantum function");
        case QKind::Pair:
        case QKind::Tensor:
            if (!is_qvalue(t->a)) {
                return rebuild(t, step(t->a), t->b);
            }
            return rebuild(t, t->a, step(t->b));
        case QKind::Fst:
        case QKind::Snd:
            if (!is_qvalue(t->a)) {
                return rebuild(t, step(t->a));
            }
            if (t->a->kind == QKind::Pair) {
                return t->kind == QKind::Fst ? t->a->a : t->a->b;
            }
            stuck(t, "projection of a non-pair");
        case QKind::If:
            if (!is_qvalue(t->a)) {
                return rebuild(t, step(t->a));
            }
            if (t->a->kind == QKind::True) {
                return t->b;
            }
            if (t->a->kind == QKind::False) {
                return t->c;
            }
            stuck(t, "condition is not a bit");
        case QKind::LetTensor: {
            if (!is_qvalue(t->a)) {
                return rebuild(t, step(t->a));
            }
            if (t->a->kind != QKind::Tensor) {
                stuck(t, "destructing a non-tensor");
            }
            // Simultaneous substitution: rename y first so that x := u
            // cannot touch occurrences of y inside u.
            std::set<std::string> avoid = q_free_vars(t->b);
            avoid.merge(q_free_vars(t->a));
            std::string y = fresh_name(t->name2 + "'", avoid);
            QTermPtr body = t->name == t->name2 ? t->b : q_substitute(t->b, t->name2, q_var(y));
            body = q_substitute(body, t->name, t->a->a);
            return q_substitute(body, y, t->a->b);
        }
        case QKind::New: {
            if (!is_qvalue(t->a)) {
                return rebuild(t, step(t->a));
            }
            if (t->a->kind != QKind::True && t->a->kind != QKind::False) {
                stuck(t, "new of a non-bit");
            }
            if (!controls_.empty()) {
                stuck(t, "allocation inside a controlled operation is not supported");
            }
            add_qubit(p_.state, t->a->kind == QKind::False);
            std::set<std::string> avoid;
            all_names(p_.term, avoid);
            for (const auto &[x, w] : p_.wires) {
                avoid.insert(x);
            }
            std::string x = fresh_name("q" + std::to_string(p_.state.qubits()), avoid);
            p_.wires[x] = p_.state.qubits();
            return q_var(x);
        }
        case QKind::Gate: {
            if (!is_qvalue(t->a)) {
                return rebuild(t, step(t->a));
            }
            if (t->a->kind != QKind::Var || !p_.wires.contains(t->a->name)) {
                stuck(t, "gate argument is not a wire");
            }
            apply_gate(p_.state, p_.wires.at(t->a->name), gates_.at(t->name), controls_);
            return t->a;
        }
        case QKind::Ctl:
        case QKind::Ctl1:
            return rebuild(t, step(t->a));
        default:
            stuck(t, "no rule applies");
        }
    }

  private:
    [[noreturn]] void stuck(const QTermPtr &t, const std::string &why) const {
        throw StuckError("stuck at `" + to_string(t) + "`: " + why);
    }

    // ctl(f) @ (c (x) w): run f @ w with every gate controlled on wire c.
    QTermPtr controlled(const QTermPtr &t) {
        const QTermPtr &arg = t->b;
        if (arg->kind != QKind::Tensor || arg->a->kind != QKind::Var || !p_.wires.contains(arg->a->name)) {
            stuck(t, "controlled operation needs a control wire");
        }
        const std::string &c = arg->a->name;
        if (q_free_vars(arg->b).contains(c)) {
            stuck(t, "control wire also used as target");
        }
        controls_.emplace_back(p_.wires.at(c), t->a->kind == QKind::Ctl1);
        QTermPtr inner = q_appq(t->a->a, arg->b);
        std::size_t fuel = kControlledFuel;
        while (!is_qvalue(inner)) {
            if (fuel-- == 0) {
                stuck(t, "controlled body does not terminate");
            }
            inner = step(inner);
        }
        controls_.pop_back();
        if (!q_alpha_equal(inner, arg->b)) {
            stuck(t, "controlled body returned different wires");
        }
        return arg;
    }

    Program &p_;
    const GateTable &gates_;
    std::vector<std::pair<std::size_t, bool>> controls_;
};

}  // namespace

std::optional<Program> lq_step(const Program &p, const GateTable &gates) {
    if (is_qvalue(p.term)) {
        return std::nullopt;
    }
    Program next = p;
    Machine m(next, gates);
    next.term = m.step(p.term);
    return next;
}

LqRun lq_run(const Program &p, const GateTable &gates, std::size_t fuel,
             const std::function<void(const Program &)> &trace) {
    LqRun run{.program = p};
    if (trace) {
        trace(run.program);
    }
    while (run.steps < fuel) {
        auto next = lq_step(run.program, gates);
        if (!next) {
            run.finished = true;
            return run;
        }
        run.program = std::move(*next);
        ++run.steps;
        if (trace) {
            trace(run.program);
        }
    }
    run.finished = is_qvalue(run.program.term);
    return run;
}

// ---------------------------------------------------------------- JSON

Program parse_program(std::string_view text, const GateTable &gates) {
    json j = parse_json(text);
    if (!j.is_object() || !j.contains("term") || !j["term"].is_string()) {
        throw DomainError("a program needs a \"term\" string");
    }
    Program p;
    if (j.contains("amplitudes")) {
        p.state.amplitudes.clear();
        for (const auto &a : j["amplitudes"]) {
            p.state.amplitudes.push_back(scalar_of(a));
        }
    }
    if (j.contains("wires")) {
        for (const auto &[x, w] : j["wires"].items()) {
            if (!w.is_number_integer() || w.get<long long>() < 1) {
                throw DomainError("wire index of " + x + " must be a positive integer");
            }
            p.wires[x] = w.get<std::size_t>();
        }
    }
    p.term = parse_qterm(j["term"].get<std::string>(), &gates);
    validate_program(p);
    return p;
}

std::string program_to_json(const Program &p, int indent) {
    json amps = json::array();
    for (auto a : p.state.amplitudes) {
        amps.push_back(scalar_json(a));
    }
    json wires = json::object();
    for (const auto &[x, w] : p.wires) {
        wires[x] = w;
    }
    json j{{"amplitudes", amps}, {"wires", wires}, {"term", to_string(p.term)}};
    return j.dump(indent);
}

}  // namespace ulc
