#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "ulc/errors.hpp"
#include "ulc/lambdaq.hpp"
#include "ulc/prelude.hpp"
#include "ulc/semantics.hpp"
#include "ulc/syntax.hpp"
#include "ulc/typing.hpp"

namespace ulc::cli {

namespace {

using nlohmann::json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kError = 2;

int exit_code(Tri t) {
    switch (t) {
    case Tri::Yes:
        return kPass;
    case Tri::No:
        return kFail;
    case Tri::Unsupported:
        break;
    }
    return kError;
}

json scalar_json(Scalar s) { return json{{"re", s.real()}, {"im", s.imag()}}; }

json canonical_json(const Canonical &c) {
    json items = json::array();
    for (const auto &s : c) {
        items.push_back(json{{"coef", scalar_json(s.coef)}, {"term", to_string(s.term)}});
    }
    return items;
}

json matrix_json(const Matrix &m) {
    json rows = json::array();
    for (const auto &row : m) {
        json r = json::array();
        for (auto x : row) {
            r.push_back(scalar_json(x));
        }
        rows.push_back(r);
    }
    return rows;
}

std::string matrix_text(const Matrix &m) {
    std::string out;
    for (const auto &row : m) {
        out += "  [";
        for (std::size_t j = 0; j < row.size(); ++j) {
            out += (j ? ", " : "") + format_scalar(row[j]);
        }
        out += "]\n";
    }
    return out;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw DomainError("cannot read " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Options {
    bool json = false;
    std::size_t fuel = kDefaultFuel;
    bool trace = false;
    bool semantic = false;
    std::string input;
    std::string type;
    std::string gates_file;
    std::string translate_gates_file;
};

class Commands {
  public:
    Commands(const Options &o, std::ostream &out) : o_(o), out_(out) {}

    int eval() {
        const Canonical start = canonicalize(parse_dist(o_.input, &prelude()));
        json trace = json::array();
        TraceFn fn;
        if (o_.trace) {
            fn = [&](const Canonical &c) {
                if (o_.json) {
                    trace.push_back(to_string(c));
                } else {
                    out_ << "  " << to_string(c) << "\n";
                }
            };
        }
        EvalOutcome r = normalize(start, o_.fuel, fn);
        if (o_.json) {
            json j{{"normal", r.normal}, {"steps", r.steps}, {"result", canonical_json(r.result)},
                   {"text", to_string(r.result)}};
            if (o_.trace) {
                j["trace"] = trace;
            }
            out_ << j.dump(2) << "\n";
        } else {
            out_ << to_string(r.result) << "\n";
            if (!r.normal) {
                out_ << "out of fuel after " << r.steps << " steps\n";
            }
        }
        return r.normal ? kPass : kError;
    }

    int check_unitary() {
        const TypePtr t = parse_type(o_.type);
        if (t->kind != TypeKind::Arrow && t->kind != TypeKind::UArrow) {
            throw UnsupportedType("--type must be an arrow A -> B or A => B");
        }
        const ArrowKind kind = t->kind == TypeKind::Arrow ? ArrowKind::Pure : ArrowKind::Unit;
        const Canonical f = canonicalize(parse_dist(o_.input, &prelude()));
        UnitaryReport r = check_unitary_endo(f, t->l, t->r, kind, o_.fuel);
        if (o_.json) {
            json inputs = json::array();
            for (const auto &b : r.basis_inputs) {
                inputs.push_back(to_string(b));
            }
            json images = json::array();
            for (const auto &c : r.images) {
                images.push_back(canonical_json(c));
            }
            out_ << json{{"verdict", to_string(r.verdict)}, {"message", r.message},   {"basis", inputs},
                         {"images", images},                 {"gram", matrix_json(r.gram)},
                         {"matrix", matrix_json(r.matrix)}}
                        .dump(2)
                 << "\n";
        } else {
            out_ << to_string(r.verdict) << (r.message.empty() ? "" : ": " + r.message) << "\n";
            if (!r.matrix.empty()) {
                out_ << "matrix:\n" << matrix_text(r.matrix);
            }
            if (!r.gram.empty()) {
                out_ << "gram:\n" << matrix_text(r.gram);
            }
        }
        return exit_code(r.verdict);
    }

    int typecheck() {
        const TypingJudgment j = parse_judgment(o_.input, &prelude());
        std::string failure;
        auto d = try_infer(j.context, j.term, j.type, o_.fuel, &failure);
        std::optional<SemanticReport> sem;
        if (o_.semantic) {
            sem = validate_semantically(j, o_.fuel);
        }
        if (o_.json) {
            json out{{"judgment", to_string(j)}, {"derivable", d.has_value()}};
            if (d) {
                out["derivation"] = to_string(*d);
                out["checked"] = static_cast<bool>(check_derivation(*d, o_.fuel));
            } else {
                out["failure"] = failure;
            }
            if (sem) {
                out["semantic"] = json{{"verdict", to_string(sem->verdict)}, {"message", sem->message}};
            }
            out_ << out.dump(2) << "\n";
        } else {
            if (d) {
                out_ << "yes\n" << to_string(*d);
            } else {
                out_ << "no: " << failure << "\n";
            }
            if (sem) {
                out_ << "semantic: " << to_string(sem->verdict) << (sem->message.empty() ? "" : ": " + sem->message)
                     << "\n";
            }
        }
        return d ? kPass : kFail;
    }

    int orth() {
        const OrthogonalityJudgment j = parse_orthogonality(o_.input, &prelude());
        SemanticReport r = check_orthogonality(j, o_.fuel);
        if (o_.json) {
            out_ << json{{"judgment", to_string(j)}, {"verdict", to_string(r.verdict)}, {"message", r.message}}.dump(2)
                 << "\n";
        } else {
            out_ << to_string(r.verdict) << (r.message.empty() ? "" : ": " + r.message) << "\n";
        }
        return exit_code(r.verdict);
    }

    int lq_typecheck() {
        const GateTable g = gates(o_.gates_file);
        const Program p = parse_program(read_file(o_.input), g);
        try {
            QTyping t = lq_program_type(p, g);
            const char *form = t.judgment == Judgment::Classical ? "classical" : "quantum";
            if (o_.json) {
                out_ << json{{"typeable", true}, {"judgment", form}, {"type", to_string(t.type)},
                             {"translated_type", to_string(translate_type(t.type))}}
                            .dump(2)
                     << "\n";
            } else {
                out_ << to_string(t.type) << " (" << form << ")\n";
            }
            return kPass;
        } catch (const QTypeError &e) {
            if (o_.json) {
                out_ << json{{"typeable", false}, {"error", e.what()}}.dump(2) << "\n";
            } else {
                out_ << "not typeable: " << e.what() << "\n";
            }
            return kFail;
        }
    }

    int lq_run() {
        const GateTable g = gates(o_.gates_file);
        const Program p = parse_program(read_file(o_.input), g);
        json trace = json::array();
        std::function<void(const Program &)> fn;
        if (o_.trace) {
            fn = [&](const Program &q) {
                if (o_.json) {
                    trace.push_back(json::parse(program_to_json(q, -1)));
                } else {
                    out_ << "  " << to_string(q.state) << "  " << to_string(q.term) << "\n";
                }
            };
        }
        LqRun r = ulc::lq_run(p, g, o_.fuel, fn);
        if (o_.json) {
            json j{{"finished", r.finished}, {"steps", r.steps}, {"program", json::parse(program_to_json(r.program))}};
            if (o_.trace) {
                j["trace"] = trace;
            }
            out_ << j.dump(2) << "\n";
        } else {
            out_ << "state: " << to_string(r.program.state) << "\n";
            out_ << "wires:";
            for (const auto &[x, w] : r.program.wires) {
                out_ << " " << x << "=" << w;
            }
            out_ << "\nterm: " << to_string(r.program.term) << "\n";
            if (!r.finished) {
                out_ << "out of fuel after " << r.steps << " steps\n";
            }
        }
        return r.finished ? kPass : kError;
    }

    int lq_translate() {
        const GateTable g = gates(o_.gates_file);
        const Program p = parse_program(read_file(o_.input), g);
        const Canonical c = translate_program(p, g);
        const TermPtr t = translate_term(p.term, g);
        if (o_.json) {
            out_ << json{{"term", to_string(t)}, {"program", canonical_json(c)}, {"text", to_string(c)}}.dump(2)
                 << "\n";
        } else {
            out_ << "term: " << to_string(t, 8) << "\n";
            out_ << "program: " << to_string(c) << "\n";
        }
        return kPass;
    }

    int lq_adequacy() {
        const GateTable g = gates(o_.gates_file);
        const Program p = parse_program(read_file(o_.input), g);
        AdequacyOptions opts;
        opts.lq_fuel = o_.fuel;
        opts.eval_fuel = o_.fuel;
        if (!o_.translate_gates_file.empty()) {
            opts.translation_gates = gates(o_.translate_gates_file);
        }
        try {
            AdequacyReport r = adequacy_check(p, g, opts);
            if (o_.json) {
                json steps = json::array();
                for (const auto &s : r.steps) {
                    steps.push_back(json{{"index", s.index}, {"before", s.before}, {"after", s.after}});
                }
                out_ << json{{"adequate", true},
                             {"finished", r.finished},
                             {"steps", steps},
                             {"typeable", to_string(r.typeable)},
                             {"typing", r.typing_message}}
                            .dump(2)
                     << "\n";
            } else {
                for (const auto &s : r.steps) {
                    out_ << "step " << s.index << ": " << s.after << "\n";
                }
                out_ << "adequate over " << r.steps.size() << " steps" << (r.finished ? "" : " (out of fuel)") << "\n";
                out_ << "typeable: " << to_string(r.typeable) << ": " << r.typing_message << "\n";
            }
            return r.finished ? kPass : kError;
        } catch (const AdequacyViolation &e) {
            if (o_.json) {
                out_ << json{{"adequate", false}, {"error", e.what()}}.dump(2) << "\n";
            } else {
                out_ << "violation: " << e.what() << "\n";
            }
            return kFail;
        }
    }

  private:
    static GateTable gates(const std::string &file) {
        return file.empty() ? GateTable::standard() : parse_gate_table(read_file(file));
    }

    const Options &o_;
    std::ostream &out_;
};

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Unitary linear-algebraic lambda calculus tools"};
    app.require_subcommand(1);
    Options o;
    app.add_flag("--json", o.json, "structured output");

    auto fuel = [&](CLI::App *c) { c->add_option("--fuel", o.fuel, "step budget")->capture_default_str(); };

    auto *eval = app.add_subcommand("eval", "normalize a term distribution");
    eval->add_option("expr", o.input)->required();
    eval->add_flag("--trace", o.trace, "print every one-step reduct");
    fuel(eval);

    auto *unitary = app.add_subcommand("check-unitary", "decide f : #A -> #B or #A => #B");
    unitary->add_option("expr", o.input)->required();
    unitary->add_option("--type", o.type, "arrow type")->required();
    fuel(unitary);

    auto *typecheck = app.add_subcommand("typecheck", "search a typing derivation");
    typecheck->add_option("judgment", o.input, "\"ctx |- expr : type\"")->required();
    typecheck->add_flag("--semantic", o.semantic, "also validate against the semantics");
    fuel(typecheck);

    auto *orth = app.add_subcommand("orth", "decide an orthogonality judgment");
    orth->add_option("judgment", o.input)->required();
    fuel(orth);

    auto *lq = app.add_subcommand("lq", "lambda_Q programs");
    lq->require_subcommand(1);
    std::vector<CLI::App *> lq_cmds;
    const std::pair<const char *, const char *> lq_names[] = {
        {"typecheck", "type a program against its wires"},
        {"run", "run a program on its initial state"},
        {"translate", "translate a program into the calculus"},
        {"adequacy", "compare the run against the translated evaluation"},
    };
    for (const auto &[name, desc] : lq_names) {
        auto *c = lq->add_subcommand(name, desc);
        c->add_option("file", o.input, "program JSON")->required()->check(CLI::ExistingFile);
        c->add_option("--gates", o.gates_file, "gate table JSON")->check(CLI::ExistingFile);
        fuel(c);
        lq_cmds.push_back(c);
    }
    lq_cmds[1]->add_flag("--trace", o.trace, "print every configuration");
    lq_cmds[3]->add_option("--translate-gates", o.translate_gates_file, "gate table used by the translation")
        ->check(CLI::ExistingFile);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kPass : kError;
    }

    Commands cmd(o, out);
    try {
        if (eval->parsed()) {
            return cmd.eval();
        }
        if (unitary->parsed()) {
            return cmd.check_unitary();
        }
        if (typecheck->parsed()) {
            return cmd.typecheck();
        }
        if (orth->parsed()) {
            return cmd.orth();
        }
        if (lq_cmds[0]->parsed()) {
            return cmd.lq_typecheck();
        }
        if (lq_cmds[1]->parsed()) {
            return cmd.lq_run();
        }
        if (lq_cmds[2]->parsed()) {
            return cmd.lq_translate();
        }
        if (lq_cmds[3]->parsed()) {
            return cmd.lq_adequacy();
        }
    } catch (const ParseError &e) {
        err << "parse error at " << e.what() << "\n";
        return kError;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kError;
    }
    return kError;
}

}  // namespace ulc::cli
