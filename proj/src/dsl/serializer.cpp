#include <sstream>

#include "oblique/dsl/document.hpp"

namespace oblique::dsl {

namespace {

int precedence(const Expr& e) {
    switch (e.op) {
        case Expr::Op::disjunction: return 1;
        case Expr::Op::conjunction: return 2;
        case Expr::Op::negate: return 3;
        default: return 4;
    }
}

void write_expr(std::ostream& out, const Expr& e);

void write_operand(std::ostream& out, const Expr& child, int parent) {
    // n-ary nodes are flattened by the parser, so a nested node of the same
    // precedence needs parentheses to survive a round trip.
    bool wrap = precedence(child) <= parent && precedence(child) < 3;
    if (wrap) out << '(';
    write_expr(out, child);
    if (wrap) out << ')';
}

void write_expr(std::ostream& out, const Expr& e) {
    switch (e.op) {
        case Expr::Op::constant: out << (e.truth ? '1' : '0'); return;
        case Expr::Op::variable: out << e.name; return;
        case Expr::Op::equals: out << e.name << " == " << e.value; return;
        case Expr::Op::not_equals: out << e.name << " != " << e.value; return;
        case Expr::Op::negate:
            out << '!';
            write_operand(out, e.args.at(0), 3);
            return;
        case Expr::Op::conjunction:
        case Expr::Op::disjunction: {
            const char* sep = e.op == Expr::Op::conjunction ? " & " : " | ";
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out << sep;
                write_operand(out, e.args[i], precedence(e));
            }
            return;
        }
    }
}

std::string amount(const Amount& a) {
    if (a.parameter.empty()) return to_literal(a.literal);
    return (a.negated ? "-" : "") + a.parameter;
}

std::string literal(const LiteralDecl& lit) { return lit.name + (lit.negated ? " != " : " = ") + lit.value; }

std::string conjunction(const std::vector<LiteralDecl>& lits) {
    std::string out;
    for (std::size_t i = 0; i < lits.size(); ++i) out += (i ? " & " : "") + literal(lits[i]);
    return out;
}

std::string action_list(const std::vector<LiteralDecl>& lits) {
    std::string out;
    for (std::size_t i = 0; i < lits.size(); ++i) out += (i ? ", " : "") + literal(lits[i]);
    return out;
}

const char* kind_word(VarKind kind) {
    switch (kind) {
        case VarKind::exogenous: return "exogenous";
        case VarKind::endogenous: return "endogenous";
        case VarKind::decision: return "decision";
    }
    return "";
}

std::string query(const QueryDecl& q) {
    std::string out;
    auto tail = [&] {
        if (!q.action.empty()) out += " under " + action_list(q.action);
        if (q.confidence) out += " confidence " + to_literal(*q.confidence);
    };
    switch (q.kind) {
        case QueryKind::intent: out = "intent " + conjunction(q.outcome); break;
        case QueryKind::affect:
            out = "affect ";
            for (std::size_t i = 0; i < q.variables.size(); ++i) out += (i ? ", " : "") + q.variables[i];
            break;
        case QueryKind::oblique: out = "oblique " + conjunction(q.outcome) + " given " + conjunction(q.given); break;
        case QueryKind::kglt: return "kglt";
        case QueryKind::kglt_oblique:
            out = "kglt_oblique " + conjunction(q.outcome);
            if (!q.given.empty()) out += " given " + conjunction(q.given);
            break;
    }
    tail();
    return out;
}

}  // namespace

std::string render_query(const QueryDecl& q) { return query(q); }

std::string serialize(const ModelDocument& doc) {
    std::ostringstream out;
    bool first = true;
    auto section = [&](const char* name) {
        if (!first) out << '\n';
        first = false;
        out << '[' << name << "]\n";
    };

    if (!doc.parameters.empty()) {
        section("parameters");
        for (const auto& p : doc.parameters) out << p.name << " = " << to_literal(p.value) << '\n';
    }

    section("variables");
    for (const auto& v : doc.variables) {
        out << kind_word(v.kind) << ' ' << v.name << " :";
        for (const auto& value : v.domain) out << ' ' << value;
        if (!v.observes.empty()) {
            out << " observes ";
            for (std::size_t i = 0; i < v.observes.size(); ++i) out << (i ? ", " : "") << v.observes[i];
        }
        out << '\n';
    }

    if (!doc.equations.empty()) {
        section("equations");
        for (const auto& eq : doc.equations) {
            out << eq.target << " = ";
            if (const auto* expr = std::get_if<Expr>(&eq.body)) {
                write_expr(out, *expr);
                out << '\n';
                continue;
            }
            const auto& table = std::get<TableDef>(eq.body);
            out << "table(";
            for (std::size_t i = 0; i < table.parents.size(); ++i) out << (i ? ", " : "") << table.parents[i];
            out << ") {\n";
            for (const auto& row : table.rows) {
                out << "  ";
                for (const auto& input : row.inputs) out << input << ' ';
                out << "-> " << row.output << '\n';
            }
            out << "}\n";
        }
    }

    if (!doc.distribution.empty()) {
        section("distribution");
        for (const auto& d : doc.distribution) {
            out << d.name << " = ";
            if (!d.full) {
                out << to_literal(d.weights.at(0)) << '\n';
                continue;
            }
            out << '{';
            for (std::size_t i = 0; i < d.weights.size(); ++i) out << (i ? ", " : "") << to_literal(d.weights[i]);
            out << "}\n";
        }
    }

    if (doc.utility) {
        section("utility");
        for (const auto& term : doc.utility->terms) out << conjunction(term.condition) << " -> " << amount(term.amount) << '\n';
        if (doc.utility->default_value) out << "default = " << amount(*doc.utility->default_value) << '\n';
    }

    if (!doc.reference.empty()) {
        section("reference");
        for (const auto& r : doc.reference) {
            out << r.decision << " :";
            for (const auto& value : r.values) out << ' ' << value;
            out << '\n';
        }
    }

    if (!doc.queries.empty()) {
        section("queries");
        for (const auto& q : doc.queries) out << query(q) << '\n';
    }
    return out.str();
}

}  // namespace oblique::dsl
