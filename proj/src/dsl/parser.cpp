#include <algorithm>
#include <map>
#include <set>

#include "lexer.hpp"
#include "oblique/dsl/document.hpp"

namespace oblique::dsl {

std::string format(const ParseDiagnostic& d) {
    std::string out = std::to_string(d.line) + ":" + std::to_string(d.column) + ": ";
    out += d.severity == Severity::error ? "error: " : "warning: ";
    out += d.message;
    return out;
}

bool ParseResult::ok() const {
    return std::none_of(diagnostics.begin(), diagnostics.end(),
                        [](const ParseDiagnostic& d) { return d.severity == Severity::error; });
}

const VariableDecl* ModelDocument::variable(std::string_view name) const {
    for (const auto& v : variables) {
        if (v.name == name) return &v;
    }
    return nullptr;
}

namespace {

enum class Section { none, parameters, variables, equations, distribution, utility, reference, queries };

const std::map<std::string, Section, std::less<>> kSections = {
    {"parameters", Section::parameters}, {"variables", Section::variables}, {"equations", Section::equations},
    {"distribution", Section::distribution}, {"utility", Section::utility}, {"reference", Section::reference},
    {"queries", Section::queries},
};

bool is_boolean(const VariableDecl& v) { return v.domain == std::vector<std::string>{"0", "1"}; }

// Thrown after a syntax error has been recorded; the parser then skips to
// the next line.
struct SyntaxError {};

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

    ParseResult run() {
        while (peek().kind != Tok::end) {
            if (accept(Tok::newline)) continue;
            line_start_ = pos_;
            try {
                if (peek().kind == Tok::lbracket) {
                    header();
                } else {
                    statement();
                }
                if (peek().kind != Tok::end) expect(Tok::newline, "end of line");
            } catch (const SyntaxError&) {
                synchronize();
            }
        }
        if (!seen_.contains(Section::variables)) {
            error_at(1, 1, "no variables section", "");
        }
        return std::move(result_);
    }

private:
    // ---- token helpers -------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }

    const Token& advance() {
        const Token& t = tokens_[pos_];
        if (pos_ + 1 < tokens_.size()) ++pos_;
        return t;
    }

    bool accept(Tok kind) {
        if (peek().kind != kind) return false;
        advance();
        return true;
    }

    const Token& expect(Tok kind, std::string_view what) {
        if (peek().kind != kind) fail("expected " + std::string(what) + ", found " + describe(peek()));
        return advance();
    }

    bool at_keyword(std::string_view word) const { return peek().kind == Tok::identifier && peek().text == word; }

    void error_at(std::size_t line, std::size_t column, std::string message, std::string token) {
        result_.diagnostics.push_back({Severity::error, line, column, std::move(message), std::move(token)});
    }

    void error(const Token& at, std::string message) { error_at(at.line, at.column, std::move(message), at.text); }

    void error(const SourcePos& at, std::string message, std::string token) {
        error_at(at.line, at.column, std::move(message), std::move(token));
    }

    [[noreturn]] void fail(std::string message) {
        const Token& t = peek();
        error_at(t.line, t.column, std::move(message), t.kind == Tok::newline ? "" : t.text);
        throw SyntaxError{};
    }

    void synchronize() {
        int depth = 0;
        for (std::size_t i = line_start_; i < pos_; ++i) {
            if (tokens_[i].kind == Tok::lbrace) ++depth;
            if (tokens_[i].kind == Tok::rbrace) --depth;
        }
        while (peek().kind != Tok::end) {
            Tok k = peek().kind;
            if (k == Tok::newline && depth <= 0) return;
            if (k == Tok::lbrace) ++depth;
            if (k == Tok::rbrace) --depth;
            advance();
        }
    }

    void skip_newlines() {
        while (accept(Tok::newline)) {
        }
    }

    static SourcePos pos_of(const Token& t) { return {t.line, t.column}; }

    // ---- shared pieces --------------------------------------------------

    std::string value_token() {
        if (peek().kind == Tok::identifier || peek().kind == Tok::number) return advance().text;
        fail("expected a value, found " + describe(peek()));
    }

    Rational rational() {
        const Token& start = peek();
        std::string text;
        if (accept(Tok::minus)) text = "-";
        text += expect(Tok::number, "a number").text;
        if (accept(Tok::slash)) text += "/" + expect(Tok::number, "a denominator").text;
        auto value = parse_rational(text);
        if (!value) {
            error(start, "malformed rational literal '" + text + "'");
            throw SyntaxError{};
        }
        return *value;
    }

    const VariableDecl* lookup(const Token& name) {
        const auto* var = result_.document.variable(name.text);
        if (!var) error(name, "unknown variable '" + name.text + "'");
        return var;
    }

    void check_value(const VariableDecl* var, const std::string& value, const SourcePos& at) {
        if (var && std::find(var->domain.begin(), var->domain.end(), value) == var->domain.end()) {
            error(at, "'" + value + "' is not a value of '" + var->name + "'", value);
        }
    }

    LiteralDecl literal(bool allow_negation) {
        const Token& name = expect(Tok::identifier, "a variable name");
        LiteralDecl lit{name.text, "", false, pos_of(name)};
        if (allow_negation && accept(Tok::not_equals)) {
            lit.negated = true;
        } else if (!accept(Tok::assign)) {
            fail(std::string("expected '='") + (allow_negation ? " or '!='" : "") + ", found " + describe(peek()));
        }
        const Token& value_at = peek();
        lit.value = value_token();
        check_value(lookup(name), lit.value, pos_of(value_at));
        return lit;
    }

    std::vector<LiteralDecl> conjunction(bool allow_negation) {
        std::vector<LiteralDecl> out{literal(allow_negation)};
        while (accept(Tok::amp)) out.push_back(literal(allow_negation));
        return out;
    }

    void require_kind(const LiteralDecl& lit, bool decision, const char* role) {
        const auto* var = result_.document.variable(lit.name);
        if (!var) return;
        bool is_decision = var->kind == VarKind::decision;
        bool ok = decision ? is_decision : var->kind == VarKind::endogenous;
        if (!ok) error(lit.pos, "'" + lit.name + "' cannot be used as " + role, lit.name);
    }

    // ---- sections -------------------------------------------------------

    void header() {
        const Token& open = expect(Tok::lbracket, "'['");
        const Token& name = expect(Tok::identifier, "a section name");
        expect(Tok::rbracket, "']'");
        auto it = kSections.find(name.text);
        if (it == kSections.end()) {
            error(name, "unknown section '" + name.text + "'");
            section_ = Section::none;
            unknown_section_ = true;
            return;
        }
        unknown_section_ = false;
        if (!seen_.insert(it->second).second) error(open, "duplicate section '" + name.text + "'");
        section_ = it->second;
        if (section_ == Section::utility && !result_.document.utility) {
            result_.document.utility = UtilityDecl{{}, std::nullopt, pos_of(open)};
        }
    }

    void statement() {
        switch (section_) {
            case Section::none:
                if (unknown_section_) {
                    synchronize();
                    return;
                }
                fail("statement outside of a section");
            case Section::parameters: return parameter();
            case Section::variables: return variable();
            case Section::equations: return equation();
            case Section::distribution: return distribution();
            case Section::utility: return utility();
            case Section::reference: return reference();
            case Section::queries: return query();
        }
    }

    void parameter() {
        const Token& name = expect(Tok::identifier, "a parameter name");
        expect(Tok::assign, "'='");
        Rational value = rational();
        auto& params = result_.document.parameters;
        if (std::any_of(params.begin(), params.end(), [&](const auto& p) { return p.name == name.text; })) {
            error(name, "duplicate parameter '" + name.text + "'");
            return;
        }
        params.push_back({name.text, value, pos_of(name)});
    }

    void variable() {
        const Token& kind_tok = expect(Tok::identifier, "'exogenous', 'endogenous' or 'decision'");
        VariableDecl decl;
        if (kind_tok.text == "exogenous") {
            decl.kind = VarKind::exogenous;
        } else if (kind_tok.text == "endogenous") {
            decl.kind = VarKind::endogenous;
        } else if (kind_tok.text == "decision") {
            decl.kind = VarKind::decision;
        } else {
            error(kind_tok, "unknown variable kind '" + kind_tok.text + "'");
            throw SyntaxError{};
        }
        const Token& name = expect(Tok::identifier, "a variable name");
        decl.name = name.text;
        decl.pos = pos_of(name);
        expect(Tok::colon, "':'");
        while (peek().kind == Tok::identifier || peek().kind == Tok::number) {
            if (at_keyword("observes")) break;
            const Token& value = advance();
            if (std::find(decl.domain.begin(), decl.domain.end(), value.text) != decl.domain.end()) {
                error(value, "repeated value '" + value.text + "' in the domain of '" + decl.name + "'");
                continue;
            }
            decl.domain.push_back(value.text);
        }
        if (decl.domain.empty()) fail("expected at least one domain value for '" + decl.name + "'");
        if (at_keyword("observes")) {
            const Token& kw = advance();
            if (decl.kind != VarKind::decision) error(kw, "only decisions can observe other variables");
            do {
                const Token& parent = expect(Tok::identifier, "a variable name");
                if (lookup(parent)) decl.observes.push_back(parent.text);
            } while (accept(Tok::comma));
        }
        if (result_.document.variable(decl.name)) {
            error(name, "duplicate variable '" + decl.name + "'");
            return;
        }
        result_.document.variables.push_back(std::move(decl));
    }

    void equation() {
        const Token& target = expect(Tok::identifier, "a variable name");
        expect(Tok::assign, "'='");
        const auto* var = lookup(target);
        if (var && var->kind != VarKind::endogenous) {
            error(target, std::string("'") + target.text + "' is " +
                              (var->kind == VarKind::exogenous ? "exogenous" : "a decision") + " and takes no equation");
        }
        EquationDecl decl{target.text, Expr{}, pos_of(target)};
        if (at_keyword("table") && peek(1).kind == Tok::lparen) {
            decl.body = table(var);
        } else {
            const Token& start = peek();
            decl.body = expression();
            if (var && !is_boolean(*var)) {
                error(start, "expression for '" + var->name + "' needs a {0, 1} domain; use a table");
            }
        }
        auto& eqs = result_.document.equations;
        if (std::any_of(eqs.begin(), eqs.end(), [&](const auto& e) { return e.target == target.text; })) {
            error(target, "duplicate equation for '" + target.text + "'");
            return;
        }
        eqs.push_back(std::move(decl));
    }

    TableDef table(const VariableDecl* target) {
        advance();  // table
        expect(Tok::lparen, "'('");
        TableDef def;
        std::vector<const VariableDecl*> parents;
        if (peek().kind != Tok::rparen) {
            do {
                const Token& parent = expect(Tok::identifier, "a parent name");
                parents.push_back(lookup(parent));
                def.parents.push_back(parent.text);
            } while (accept(Tok::comma));
        }
        expect(Tok::rparen, "')'");
        expect(Tok::lbrace, "'{'");
        while (true) {
            skip_newlines();
            if (accept(Tok::rbrace)) break;
            TableRow row{{}, "", pos_of(peek())};
            while (peek().kind == Tok::identifier || peek().kind == Tok::number) {
                const Token& value = advance();
                std::size_t index = row.inputs.size();
                if (index < parents.size()) check_value(parents[index], value.text, pos_of(value));
                row.inputs.push_back(value.text);
            }
            const Token& arrow = expect(Tok::arrow, "'->'");
            if (row.inputs.size() != parents.size()) {
                error(arrow, "row has " + std::to_string(row.inputs.size()) + " inputs, expected " +
                                 std::to_string(parents.size()));
            }
            const Token& out = peek();
            row.output = value_token();
            check_value(target, row.output, pos_of(out));
            def.rows.push_back(std::move(row));
            if (accept(Tok::semicolon)) continue;
            if (peek().kind == Tok::newline || peek().kind == Tok::rbrace) continue;
            fail("expected ';', a new line or '}', found " + describe(peek()));
        }
        return def;
    }

    Expr expression() {
        Expr first = conjunction_expr();
        if (peek().kind != Tok::pipe) return first;
        Expr node;
        node.op = Expr::Op::disjunction;
        node.pos = first.pos;
        node.args.push_back(std::move(first));
        while (accept(Tok::pipe)) node.args.push_back(conjunction_expr());
        return node;
    }

    Expr conjunction_expr() {
        Expr first = unary();
        if (peek().kind != Tok::amp) return first;
        Expr node;
        node.op = Expr::Op::conjunction;
        node.pos = first.pos;
        node.args.push_back(std::move(first));
        while (accept(Tok::amp)) node.args.push_back(unary());
        return node;
    }

    Expr unary() {
        const Token& start = peek();
        if (accept(Tok::bang)) {
            Expr node;
            node.op = Expr::Op::negate;
            node.pos = pos_of(start);
            node.args.push_back(unary());
            return node;
        }
        return primary();
    }

    Expr primary() {
        const Token& t = peek();
        Expr node;
        node.pos = pos_of(t);
        if (accept(Tok::lparen)) {
            Expr inner = expression();
            expect(Tok::rparen, "')'");
            return inner;
        }
        if (t.kind == Tok::number) {
            advance();
            if (t.text != "0" && t.text != "1") {
                error(t, "boolean constant must be 0 or 1");
            }
            node.op = Expr::Op::constant;
            node.truth = t.text == "1";
            return node;
        }
        if (t.kind != Tok::identifier) fail("expected an expression, found " + describe(t));
        advance();
        node.name = t.text;
        const auto* var = lookup(t);
        if (peek().kind == Tok::equals || peek().kind == Tok::not_equals) {
            node.op = advance().kind == Tok::equals ? Expr::Op::equals : Expr::Op::not_equals;
            const Token& value = peek();
            node.value = value_token();
            check_value(var, node.value, pos_of(value));
            return node;
        }
        node.op = Expr::Op::variable;
        if (var && !is_boolean(*var)) {
            error(t, "'" + t.text + "' is not boolean; compare it with '==' or '!='");
        }
        return node;
    }

    void distribution() {
        const Token& name = expect(Tok::identifier, "a variable name");
        expect(Tok::assign, "'='");
        DistributionDecl decl{name.text, {}, false, pos_of(name)};
        const auto* var = lookup(name);
        if (var && var->kind != VarKind::exogenous) {
            error(name, "distributions are given for exogenous variables only");
        }
        if (accept(Tok::lbrace)) {
            decl.full = true;
            skip_newlines();
            do {
                skip_newlines();
                decl.weights.push_back(rational());
                skip_newlines();
            } while (accept(Tok::comma));
            expect(Tok::rbrace, "'}'");
            if (var && decl.weights.size() != var->domain.size()) {
                error(name, "distribution of '" + name.text + "' needs " + std::to_string(var->domain.size()) +
                                " weights");
            }
        } else {
            decl.weights.push_back(rational());
            if (var && var->domain.size() != 2) {
                error(name, "a single parameter needs a binary variable; give '{...}' for '" + name.text + "'");
            }
        }
        auto& dists = result_.document.distribution;
        if (std::any_of(dists.begin(), dists.end(), [&](const auto& d) { return d.name == name.text; })) {
            error(name, "duplicate distribution for '" + name.text + "'");
            return;
        }
        dists.push_back(std::move(decl));
    }

    Amount amount() {
        Amount out;
        if (peek().kind == Tok::minus && peek(1).kind == Tok::identifier) {
            advance();
            out.negated = true;
        }
        if (peek().kind == Tok::identifier) {
            const Token& name = advance();
            out.parameter = name.text;
            const auto& params = result_.document.parameters;
            if (std::none_of(params.begin(), params.end(), [&](const auto& p) { return p.name == name.text; })) {
                error(name, "unknown parameter '" + name.text + "'");
            }
            return out;
        }
        out.literal = rational();
        return out;
    }

    void utility() {
        auto& decl = *result_.document.utility;
        if (at_keyword("default") && peek(1).kind == Tok::assign) {
            const Token& kw = advance();
            advance();
            Amount value = amount();
            if (decl.default_value) {
                error(kw, "duplicate utility default");
                return;
            }
            decl.default_value = value;
            return;
        }
        UtilityTerm term;
        term.pos = pos_of(peek());
        term.condition = conjunction(true);
        expect(Tok::arrow, "'->'");
        term.amount = amount();
        decl.terms.push_back(std::move(term));
    }

    void reference() {
        const Token& name = expect(Tok::identifier, "a decision name");
        expect(Tok::colon, "':'");
        const auto* var = lookup(name);
        if (var && var->kind != VarKind::decision) error(name, "'" + name.text + "' is not a decision");
        ReferenceDecl decl{name.text, {}, pos_of(name)};
        while (peek().kind == Tok::identifier || peek().kind == Tok::number) {
            const Token& value = advance();
            check_value(var, value.text, pos_of(value));
            decl.values.push_back(value.text);
        }
        if (decl.values.empty()) fail("expected at least one reference value");
        auto& refs = result_.document.reference;
        if (std::any_of(refs.begin(), refs.end(), [&](const auto& r) { return r.decision == name.text; })) {
            error(name, "duplicate reference for '" + name.text + "'");
            return;
        }
        refs.push_back(std::move(decl));
    }

    std::vector<LiteralDecl> action_list() {
        std::vector<LiteralDecl> out;
        do {
            out.push_back(literal(false));
            require_kind(out.back(), true, "an action");
        } while (accept(Tok::comma));
        return out;
    }

    std::optional<Rational> confidence() {
        if (!at_keyword("confidence")) return std::nullopt;
        advance();
        const Token& at = peek();
        Rational value = rational();
        if (value <= 0 || value >= 1) error(at, "confidence must lie strictly between 0 and 1");
        return value;
    }

    void query() {
        const Token& kind = expect(Tok::identifier, "a query kind");
        QueryDecl q;
        q.pos = pos_of(kind);
        auto outcome = [&](bool single) {
            q.outcome = single ? std::vector<LiteralDecl>{literal(false)} : conjunction(false);
            for (const auto& lit : q.outcome) require_kind(lit, false, "an outcome");
        };
        if (kind.text == "intent") {
            q.kind = QueryKind::intent;
            outcome(false);
            if (!at_keyword("under")) fail("expected 'under', found " + describe(peek()));
            advance();
            q.action = action_list();
            q.confidence = confidence();
        } else if (kind.text == "affect") {
            q.kind = QueryKind::affect;
            do {
                const Token& name = expect(Tok::identifier, "a variable name");
                if (const auto* var = lookup(name); var && var->kind != VarKind::endogenous) {
                    error(name, "'" + name.text + "' cannot be used as an outcome");
                }
                q.variables.push_back(name.text);
            } while (accept(Tok::comma));
            if (!at_keyword("under")) fail("expected 'under', found " + describe(peek()));
            advance();
            q.action = action_list();
        } else if (kind.text == "oblique") {
            q.kind = QueryKind::oblique;
            outcome(false);
            if (!at_keyword("given")) fail("expected 'given', found " + describe(peek()));
            advance();
            q.given = conjunction(false);
            for (const auto& lit : q.given) require_kind(lit, false, "an outcome");
            if (!at_keyword("under")) fail("expected 'under', found " + describe(peek()));
            advance();
            q.action = action_list();
            q.confidence = confidence();
        } else if (kind.text == "kglt") {
            q.kind = QueryKind::kglt;
        } else if (kind.text == "kglt_oblique") {
            q.kind = QueryKind::kglt_oblique;
            q.outcome = {literal(false)};
            if (at_keyword("given")) {
                advance();
                q.given = {literal(false)};
            }
            if (at_keyword("under")) {
                advance();
                q.action = action_list();
            }
            q.confidence = confidence();
        } else {
            error(kind, "unknown query '" + kind.text + "'");
            throw SyntaxError{};
        }
        result_.document.queries.push_back(std::move(q));
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t line_start_ = 0;
    Section section_ = Section::none;
    bool unknown_section_ = false;
    std::set<Section> seen_;
    ParseResult result_;
};

}  // namespace

ParseResult parse(std::string_view text) { return Parser(text).run(); }

}  // namespace oblique::dsl
