// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#include "usolv/syntax.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <functional>
#include <sstream>

namespace usolv {

// ---------------------------------------------------------------------------
// Diagnostics

std::string Diagnostic::render() const {
    std::ostringstream os;
    os << (severity == Severity::Error ? "error" : "warning");
    if (span.line > 0) os << " at " << span.line << ":" << span.col;
    os << ": " << message;
    return os.str();
}

std::string render_all(const Diagnostics& ds) {
    std::ostringstream os;
    for (const auto& d : ds) os << d.render() << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Hashing and builders

static size_t mix(size_t h, size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

static size_t hash_str(const std::string& s) { return std::hash<std::string>{}(s); }

static size_t hash_iexpr(const IntExprPtr& e) {
    if (!e) return 0;
    size_t h = static_cast<size_t>(e->kind) + 101;
    h = mix(h, static_cast<size_t>(e->lit));
    h = mix(h, hash_str(e->param));
    h = mix(h, hash_iexpr(e->lhs));
    h = mix(h, hash_iexpr(e->rhs));
    return h;
}

IntExprPtr int_lit(long v) {
    auto e = std::make_shared<IntExpr>();
    e->kind = IntExpr::Kind::Lit;
    e->lit = v;
    return e;
}

IntExprPtr int_param(const std::string& name) {
    auto e = std::make_shared<IntExpr>();
    e->kind = IntExpr::Kind::Param;
    e->param = name;
    return e;
}

static IntExprPtr int_bin(IntExpr::Kind k, IntExprPtr a, IntExprPtr b) {
    auto e = std::make_shared<IntExpr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

IntExprPtr int_add(IntExprPtr a, IntExprPtr b) { return int_bin(IntExpr::Kind::Add, std::move(a), std::move(b)); }
IntExprPtr int_sub(IntExprPtr a, IntExprPtr b) { return int_bin(IntExpr::Kind::Sub, std::move(a), std::move(b)); }

std::string pretty(const IntExprPtr& e) {
    if (!e) return "";
    switch (e->kind) {
        case IntExpr::Kind::Lit: return std::to_string(e->lit);
        case IntExpr::Kind::Param: return e->param;
        case IntExpr::Kind::Add:
        case IntExpr::Kind::Sub: {
            std::string rhs = pretty(e->rhs);
            if (e->rhs && e->rhs->kind != IntExpr::Kind::Lit && e->rhs->kind != IntExpr::Kind::Param)
                rhs = "(" + rhs + ")";
            return pretty(e->lhs) + (e->kind == IntExpr::Kind::Add ? "+" : "-") + rhs;
        }
    }
    return "";
}

bool Action::complements(const Action& o) const {
    if (kind == ActKind::Tau || o.kind == ActKind::Tau) return false;
    return name == o.name && kind != o.kind;
}

std::string Action::text() const {
    switch (kind) {
        case ActKind::Tau: return "tau";
        case ActKind::Input:
            if (!binder.empty()) return name + "(" + binder + ")";
            if (index) return name + "<" + pretty(index) + ">";
            return name;
        case ActKind::Output:
            if (index) return "'" + name + "<" + pretty(index) + ">";
            return "'" + name;
    }
    return "";
}

int action_cmp(const Action& a, const Action& b) {
    auto rank = [](ActKind k) { return k == ActKind::Tau ? 0 : (k == ActKind::Input ? 1 : 2); };
    if (a.name != b.name) return a.name < b.name ? -1 : 1;
    if (rank(a.kind) != rank(b.kind)) return rank(a.kind) < rank(b.kind) ? -1 : 1;
    return 0;
}

static size_t hash_action(const Action& a) {
    size_t h = static_cast<size_t>(a.kind) + 7;
    h = mix(h, hash_str(a.name));
    h = mix(h, hash_str(a.binder));
    h = mix(h, hash_iexpr(a.index));
    return h;
}

static TermPtr finish(std::shared_ptr<Term> t) {
    size_t h = static_cast<size_t>(t->kind) + 13;
    h = mix(h, hash_action(t->act));
    h = mix(h, hash_str(t->name));
    for (const auto& k : t->kids) h = mix(h, k ? k->hash : 0);
    for (const auto& a : t->args) h = mix(h, hash_iexpr(a));
    t->hash = h;
    return t;
}

TermPtr mk_nil() {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Nil;
    return finish(t);
}

TermPtr mk_prefix(const Action& a, TermPtr cont) {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Prefix;
    t->act = a;
    t->kids.push_back(std::move(cont));
    return finish(t);
}

TermPtr mk_sum(std::vector<TermPtr> summands) {
    assert(summands.size() >= 2);
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Sum;
    t->kids = std::move(summands);
    return finish(t);
}

TermPtr mk_par(TermPtr l, TermPtr r) {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Par;
    t->kids.push_back(std::move(l));
    t->kids.push_back(std::move(r));
    return finish(t);
}

TermPtr mk_res(const std::string& name, TermPtr body) {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Res;
    t->name = name;
    t->kids.push_back(std::move(body));
    return finish(t);
}

TermPtr mk_const(const std::string& name, std::vector<IntExprPtr> args) {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Const;
    t->name = name;
    t->args = std::move(args);
    return finish(t);
}

TermPtr mk_var(const std::string& name, std::vector<IntExprPtr> args) {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Var;
    t->name = name;
    t->args = std::move(args);
    return finish(t);
}

static bool iexpr_eq(const IntExprPtr& a, const IntExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->lit != b->lit || a->param != b->param) return false;
    return iexpr_eq(a->lhs, b->lhs) && iexpr_eq(a->rhs, b->rhs);
}

bool term_eq(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->hash != b->hash || a->kind != b->kind || a->name != b->name) return false;
    if (a->kids.size() != b->kids.size() || a->args.size() != b->args.size()) return false;
    if (a->act.kind != b->act.kind || a->act.name != b->act.name || a->act.binder != b->act.binder)
        return false;
    if (!iexpr_eq(a->act.index, b->act.index)) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!iexpr_eq(a->args[i], b->args[i])) return false;
    for (size_t i = 0; i < a->kids.size(); ++i)
        if (!term_eq(a->kids[i], b->kids[i])) return false;
    return true;
}

bool is_pure(const TermPtr& t) {
    if (!t) return true;
    if (t->act.is_sugar() || !t->args.empty()) return false;
    for (const auto& k : t->kids)
        if (!is_pure(k)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Pretty printing
//
// Levels, loosest to tightest: 0 sum, 1 par, 2 restriction, 3 prefix, 4 atom.

static int term_level(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Sum: return 0;
        case TermKind::Par: return 1;
        case TermKind::Res: return 2;
        case TermKind::Prefix: return 3;
        default: return 4;
    }
}

static void print_term(const TermPtr& t, int min_level, std::string& out) {
    bool paren = term_level(t) < min_level;
    if (paren) out += "(";
    switch (t->kind) {
        case TermKind::Nil: out += "0"; break;
        case TermKind::Prefix:
            out += t->act.text();
            out += ".";
            print_term(t->kids[0], 3, out);
            break;
        case TermKind::Sum:
            for (size_t i = 0; i < t->kids.size(); ++i) {
                if (i) out += " + ";
                print_term(t->kids[i], 1, out);
            }
            break;
        case TermKind::Par:
            // Left-nested chains print flat; a right Par child keeps parens.
            print_term(t->kids[0], 1, out);
            out += " | ";
            print_term(t->kids[1], 2, out);
            break;
        case TermKind::Res:
            out += "new " + t->name + " in ";
            print_term(t->kids[0], 2, out);
            break;
        case TermKind::Const:
        case TermKind::Var:
            out += t->name;
            if (!t->args.empty()) {
                out += "(";
                for (size_t i = 0; i < t->args.size(); ++i) {
                    if (i) out += ", ";
                    out += pretty(t->args[i]);
                }
                out += ")";
            }
            break;
    }
    if (paren) out += ")";
}

std::string pretty(const TermPtr& t) {
    std::string out;
    print_term(t, 0, out);
    return out;
}

static std::string params_text(const std::vector<Param>& ps) {
    if (ps.empty()) return "";
    std::string out = "(";
    for (size_t i = 0; i < ps.size(); ++i) {
        if (i) out += ", ";
        out += ps[i].name + ": 0.." + std::to_string(ps[i].domain - 1);
    }
    out += ")";
    return out;
}

std::string pretty(const Program& p) {
    std::ostringstream os;
    for (const auto& c : p.channels)
        os << "channel " << c.name << " : 0.." << (c.domain - 1) << ";\n";
    for (const auto& c : p.consts)
        os << "const " << c.name << params_text(c.params) << " = " << pretty(c.body) << ";\n";
    for (const auto& s : p.systems) {
        os << "system " << s.name << " {\n";
        for (const auto& eq : s.equations)
            os << "  " << eq.var << params_text(eq.params) << " = " << pretty(eq.body) << ";\n";
        os << "}\n";
    }
    for (const auto& c : p.candidates) {
        os << "candidates " << c.name << " for " << c.system << " = (";
        for (size_t i = 0; i < c.tuple.size(); ++i) {
            if (i) os << ", ";
            os << pretty(c.tuple[i]);
        }
        os << ");\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Program lookups

const ChannelDecl* Program::find_channel(const std::string& n) const {
    for (const auto& c : channels)
        if (c.name == n) return &c;
    return nullptr;
}
const ConstDef* Program::find_const(const std::string& n) const {
    for (const auto& c : consts)
        if (c.name == n) return &c;
    return nullptr;
}
const SystemDef* Program::find_system(const std::string& n) const {
    for (const auto& s : systems)
        if (s.name == n) return &s;
    return nullptr;
}
const CandidateDef* Program::find_candidates(const std::string& n) const {
    for (const auto& c : candidates)
        if (c.name == n) return &c;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { End, LIdent, UIdent, Int, Kw, Punct };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    long value = 0;
    SourceSpan span;
};

const char* kKeywords[] = {"const", "system", "candidates", "for", "channel", "new", "in", "tau"};

bool is_keyword(const std::string& s) {
    for (const char* k : kKeywords)
        if (s == k) return true;
    return false;
}

struct Lexer {
    const std::string& src;
    size_t pos = 0;
    int line = 1, col = 1;
    Diagnostics& diags;

    Lexer(const std::string& s, Diagnostics& d) : src(s), diags(d) {}

    void advance() {
        if (pos < src.size()) {
            if (src[pos] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++pos;
        }
    }

    std::vector<Token> run() {
        std::vector<Token> out;
        while (pos < src.size()) {
            char c = src[pos];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
                continue;
            }
            if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '-') {
                while (pos < src.size() && src[pos] != '\n') advance();
                continue;
            }
            Token t;
            t.span = {line, col};
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string num;
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                    num += src[pos];
                    advance();
                }
                t.kind = Tok::Int;
                t.text = num;
                t.value = std::stol(num);
                out.push_back(t);
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::string id;
                while (pos < src.size() &&
                       (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
                    id += src[pos];
                    advance();
                }
                t.text = id;
                if (is_keyword(id))
                    t.kind = Tok::Kw;
                else
                    t.kind = std::isupper(static_cast<unsigned char>(id[0])) ? Tok::UIdent : Tok::LIdent;
                out.push_back(t);
                continue;
            }
            if (c == '.' && pos + 1 < src.size() && src[pos + 1] == '.') {
                t.kind = Tok::Punct;
                t.text = "..";
                advance();
                advance();
                out.push_back(t);
                continue;
            }
            static const std::string singles = "=;.+|(){}<>,:^'-";
            if (singles.find(c) != std::string::npos) {
                t.kind = Tok::Punct;
                t.text = std::string(1, c);
                advance();
                out.push_back(t);
                continue;
            }
            diags.push_back({Severity::Error, std::string("unexpected character '") + c + "'", t.span});
            advance();
        }
        Token end;
        end.kind = Tok::End;
        end.span = {line, col};
        out.push_back(end);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Parser

struct ParseBail {};

struct Parser {
    std::vector<Token> toks;
    size_t i = 0;
    Diagnostics& diags;

    explicit Parser(std::vector<Token> t, Diagnostics& d) : toks(std::move(t)), diags(d) {}

    const Token& peek(size_t ahead = 0) const {
        size_t j = i + ahead;
        return j < toks.size() ? toks[j] : toks.back();
    }
    const Token& next() {
        const Token& t = peek();
        if (i + 1 < toks.size()) ++i;
        return t;
    }
    bool at_punct(const std::string& p, size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Punct && peek(ahead).text == p;
    }
    bool at_kw(const std::string& k, size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Kw && peek(ahead).text == k;
    }
    [[noreturn]] void fail(const std::string& msg) {
        diags.push_back({Severity::Error, msg, peek().span});
        throw ParseBail{};
    }
    void expect_punct(const std::string& p) {
        if (!at_punct(p)) fail("expected '" + p + "'");
        next();
    }
    std::string expect_lident(const char* what) {
        if (peek().kind != Tok::LIdent) fail(std::string("expected ") + what);
        return next().text;
    }
    std::string expect_uident(const char* what) {
        if (peek().kind != Tok::UIdent) fail(std::string("expected ") + what);
        return next().text;
    }
    long expect_int() {
        if (peek().kind != Tok::Int) fail("expected integer");
        return next().value;
    }

    // iexpr := iatom { (+|-) iatom }
    IntExprPtr parse_iexpr() {
        IntExprPtr acc = parse_iatom();
        while (at_punct("+") || at_punct("-")) {
            bool add = peek().text == "+";
            next();
            IntExprPtr rhs = parse_iatom();
            acc = add ? int_add(acc, rhs) : int_sub(acc, rhs);
        }
        return acc;
    }
    IntExprPtr parse_iatom() {
        if (peek().kind == Tok::Int) return int_lit(next().value);
        if (peek().kind == Tok::LIdent) return int_param(next().text);
        if (at_punct("(")) {
            next();
            IntExprPtr e = parse_iexpr();
            expect_punct(")");
            return e;
        }
        fail("expected value expression");
    }

    // term := par { + par }
    TermPtr parse_term() {
        SourceSpan sp = peek().span;
        TermPtr first = parse_par();
        if (!at_punct("+")) return first;
        std::vector<TermPtr> kids{first};
        while (at_punct("+")) {
            next();
            kids.push_back(parse_par());
        }
        auto t = mk_sum(std::move(kids));
        const_cast<Term*>(t.get())->span = sp;
        return t;
    }

    TermPtr parse_par() {
        TermPtr acc = parse_restr();
        while (at_punct("|")) {
            next();
            acc = mk_par(acc, parse_restr());
        }
        return acc;
    }

    TermPtr parse_restr() {
        if (at_kw("new")) {
            next();
            std::vector<std::string> names;
            names.push_back(expect_lident("channel name"));
            while (at_punct(",")) {
                next();
                names.push_back(expect_lident("channel name"));
            }
            if (!at_kw("in")) fail("expected 'in'");
            next();
            TermPtr body = parse_restr();
            for (auto it = names.rbegin(); it != names.rend(); ++it) body = mk_res(*it, body);
            return body;
        }
        if (at_punct("(") && at_punct("^", 1)) {
            next();
            next();
            std::vector<std::string> names;
            names.push_back(expect_lident("channel name"));
            while (at_punct(",")) {
                next();
                names.push_back(expect_lident("channel name"));
            }
            expect_punct(")");
            TermPtr body = parse_restr();
            for (auto it = names.rbegin(); it != names.rend(); ++it) body = mk_res(*it, body);
            return body;
        }
        return parse_prefix();
    }

    bool at_action_start() const {
        return at_kw("tau") || peek().kind == Tok::LIdent || at_punct("'");
    }

    TermPtr parse_prefix() {
        if (at_action_start()) {
            SourceSpan sp = peek().span;
            Action a = parse_action();
            TermPtr cont;
            if (at_punct(".")) {
                next();
                cont = parse_prefix();
            } else {
                cont = mk_nil();  // bare action abbreviates .0
            }
            auto t = mk_prefix(a, cont);
            const_cast<Term*>(t.get())->span = sp;
            return t;
        }
        return parse_atom();
    }

    Action parse_action() {
        Action a;
        if (at_kw("tau")) {
            next();
            a.kind = ActKind::Tau;
            return a;
        }
        if (at_punct("'")) {
            next();
            a.kind = ActKind::Output;
            a.name = expect_lident("channel name after '");
            if (at_punct("<")) {
                next();
                a.index = parse_iexpr();
                expect_punct(">");
            }
            return a;
        }
        a.kind = ActKind::Input;
        a.name = expect_lident("channel name");
        if (at_punct("(")) {
            next();
            a.binder = expect_lident("value variable");
            expect_punct(")");
        } else if (at_punct("<")) {
            next();
            a.index = parse_iexpr();
            expect_punct(">");
        }
        return a;
    }

    TermPtr parse_atom() {
        SourceSpan sp = peek().span;
        if (peek().kind == Tok::Int) {
            if (peek().value != 0) fail("expected a process ('0' is the only literal process)");
            next();
            auto t = mk_nil();
            const_cast<Term*>(t.get())->span = sp;
            return t;
        }
        if (at_punct("(")) {
            next();
            TermPtr t = parse_term();
            expect_punct(")");
            return t;
        }
        if (peek().kind == Tok::UIdent) {
            std::string name = next().text;
            std::vector<IntExprPtr> args;
            if (at_punct("(")) {
                next();
                args.push_back(parse_iexpr());
                while (at_punct(",")) {
                    next();
                    args.push_back(parse_iexpr());
                }
                expect_punct(")");
            }
            auto t = mk_const(name, std::move(args));
            const_cast<Term*>(t.get())->span = sp;
            return t;
        }
        fail("expected a process");
    }

    std::vector<Param> parse_params() {
        std::vector<Param> ps;
        expect_punct("(");
        for (;;) {
            Param p;
            SourceSpan sp = peek().span;
            p.name = expect_lident("parameter name");
            expect_punct(":");
            long lo = expect_int();
            expect_punct("..");
            long hi = expect_int();
            if (lo != 0)
                diags.push_back({Severity::Error, "value domains must start at 0", sp});
            if (hi < lo)
                diags.push_back({Severity::Error, "empty value domain", sp});
            p.domain = hi + 1;
            ps.push_back(p);
            if (at_punct(",")) {
                next();
                continue;
            }
            break;
        }
        expect_punct(")");
        return ps;
    }

    Program parse_program_items() {
        Program prog;
        while (peek().kind != Tok::End) {
            try {
                if (at_kw("channel")) {
                    SourceSpan sp = peek().span;
                    next();
                    ChannelDecl c;
                    c.span = sp;
                    c.name = expect_lident("channel name");
                    expect_punct(":");
                    long lo = expect_int();
                    expect_punct("..");
                    long hi = expect_int();
                    if (lo != 0) diags.push_back({Severity::Error, "value domains must start at 0", sp});
                    if (hi < lo) diags.push_back({Severity::Error, "empty value domain", sp});
                    c.domain = hi + 1;
                    expect_punct(";");
                    prog.channels.push_back(c);
                } else if (at_kw("const")) {
                    SourceSpan sp = peek().span;
                    next();
                    ConstDef d;
                    d.span = sp;
                    d.name = expect_uident("constant name");
                    if (at_punct("(")) d.params = parse_params();
                    expect_punct("=");
                    d.body = parse_term();
                    expect_punct(";");
                    prog.consts.push_back(std::move(d));
                } else if (at_kw("system")) {
                    SourceSpan sp = peek().span;
                    next();
                    SystemDef s;
                    s.span = sp;
                    s.name = expect_uident("system name");
                    expect_punct("{");
                    while (!at_punct("}")) {
                        Equation eq;
                        eq.span = peek().span;
                        eq.var = expect_uident("equation variable");
                        if (at_punct("(")) eq.params = parse_params();
                        expect_punct("=");
                        eq.body = parse_term();
                        expect_punct(";");
                        s.equations.push_back(std::move(eq));
                    }
                    expect_punct("}");
                    prog.systems.push_back(std::move(s));
                } else if (at_kw("candidates")) {
                    SourceSpan sp = peek().span;
                    next();
                    CandidateDef c;
                    c.span = sp;
                    c.name = expect_uident("candidate binding name");
                    if (!at_kw("for")) fail("expected 'for'");
                    next();
                    c.system = expect_uident("system name");
                    expect_punct("=");
                    expect_punct("(");
                    c.tuple.push_back(parse_term());
                    while (at_punct(",")) {
                        next();
                        c.tuple.push_back(parse_term());
                    }
                    expect_punct(")");
                    expect_punct(";");
                    prog.candidates.push_back(std::move(c));
                } else {
                    fail("expected 'channel', 'const', 'system', or 'candidates'");
                }
            } catch (const ParseBail&) {
                // Recover at the next ';' or '}' and continue; cap the noise.
                if (diags.size() >= 20) break;
                while (peek().kind != Tok::End && !at_punct(";") && !at_punct("}")) next();
                if (peek().kind != Tok::End) next();
            }
        }
        return prog;
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Variable resolution and validation

namespace {

TermPtr resolve_vars(const TermPtr& t, const std::set<std::string>& vars) {
    switch (t->kind) {
        case TermKind::Const:
            if (vars.count(t->name)) {
                auto v = mk_var(t->name, t->args);
                const_cast<Term*>(v.get())->span = t->span;
                return v;
            }
            return t;
        case TermKind::Nil:
        case TermKind::Var:
            return t;
        default: {
            std::vector<TermPtr> kids;
            bool changed = false;
            for (const auto& k : t->kids) {
                TermPtr nk = resolve_vars(k, vars);
                changed |= (nk != k);
                kids.push_back(nk);
            }
            if (!changed) return t;
            auto n = std::make_shared<Term>(*t);
            n->kids = std::move(kids);
            return finish(n);
        }
    }
}

struct Validator {
    const Program& prog;
    Diagnostics& diags;

    void error(const std::string& msg, SourceSpan sp) {
        diags.push_back({Severity::Error, msg, sp});
    }

    void check_term(const TermPtr& t, const SystemDef* sys) {
        switch (t->kind) {
            case TermKind::Sum:
                for (const auto& k : t->kids) {
                    if (k->kind != TermKind::Prefix)
                        error("unguarded summand: every summand of a sum must be a prefixed process",
                              k->span.line ? k->span : t->span);
                    check_term(k, sys);
                }
                break;
            case TermKind::Const: {
                const ConstDef* d = prog.find_const(t->name);
                if (!d) {
                    error("unknown constant '" + t->name + "'", t->span);
                } else if (d->params.size() != t->args.size()) {
                    error("constant '" + t->name + "' expects " + std::to_string(d->params.size()) +
                              " argument(s), got " + std::to_string(t->args.size()),
                          t->span);
                }
                break;
            }
            case TermKind::Var: {
                const Equation* family = nullptr;
                if (sys)
                    for (const auto& eq : sys->equations)
                        if (eq.var == t->name) family = &eq;
                if (!family) {
                    error("unknown equation variable '" + t->name + "'", t->span);
                } else if (family->params.size() != t->args.size()) {
                    error("equation variable '" + t->name + "' expects " +
                              std::to_string(family->params.size()) + " argument(s), got " +
                              std::to_string(t->args.size()),
                          t->span);
                }
                break;
            }
            default:
                for (const auto& k : t->kids) check_term(k, sys);
                break;
        }
    }

    // Constants whose bodies reach another constant with no prefix above the
    // reference form the "unguarded reference" graph; cycles there would give
    // infinitely-branching SOS derivatives and are rejected.
    void check_const_recursion() {
        std::map<std::string, std::set<std::string>> edges;
        for (const auto& d : prog.consts) collect_unguarded_refs(d.body, false, edges[d.name]);
        std::map<std::string, int> color;  // 0 white, 1 grey, 2 black
        std::function<bool(const std::string&, std::vector<std::string>&)> dfs =
            [&](const std::string& k, std::vector<std::string>& path) -> bool {
            color[k] = 1;
            path.push_back(k);
            for (const auto& n : edges[k]) {
                if (!prog.find_const(n)) continue;
                if (color[n] == 1) {
                    std::string cyc = n;
                    for (auto it = path.rbegin(); it != path.rend(); ++it) {
                        cyc = *it + " -> " + cyc;
                        if (*it == n) break;
                    }
                    error("unguarded recursion through constant(s): " + cyc,
                          prog.find_const(n)->span);
                    path.pop_back();
                    return false;
                }
                if (color[n] == 0 && !dfs(n, path)) {
                    path.pop_back();
                    return false;
                }
            }
            color[k] = 2;
            path.pop_back();
            return true;
        };
        for (const auto& d : prog.consts) {
            if (color[d.name] == 0) {
                std::vector<std::string> path;
                if (!dfs(d.name, path)) return;  // one cycle report is enough
            }
        }
    }

    static void collect_unguarded_refs(const TermPtr& t, bool under_prefix,
                                       std::set<std::string>& out) {
        switch (t->kind) {
            case TermKind::Prefix:
                collect_unguarded_refs(t->kids[0], true, out);
                break;
            case TermKind::Const:
                if (!under_prefix) out.insert(t->name);
                break;
            default:
                for (const auto& k : t->kids) collect_unguarded_refs(k, under_prefix, out);
                break;
        }
    }

    void run() {
        std::set<std::string> seen;
        for (const auto& c : prog.channels)
            if (!seen.insert("chan:" + c.name).second)
                error("duplicate channel declaration '" + c.name + "'", c.span);
        for (const auto& c : prog.consts)
            if (!seen.insert("const:" + c.name).second)
                error("duplicate constant definition '" + c.name + "'", c.span);
        for (const auto& s : prog.systems) {
            if (!seen.insert("sys:" + s.name).second)
                error("duplicate system definition '" + s.name + "'", s.span);
            std::set<std::string> vars;
            for (const auto& eq : s.equations)
                if (!vars.insert(eq.var).second)
                    error("duplicate equation variable '" + eq.var + "' in system " + s.name, eq.span);
        }
        for (const auto& c : prog.candidates) {
            if (!seen.insert("cand:" + c.name).second)
                error("duplicate candidate binding '" + c.name + "'", c.span);
            if (!prog.find_system(c.system))
                error("candidates '" + c.name + "' refer to unknown system '" + c.system + "'", c.span);
        }
        for (const auto& d : prog.consts) {
            std::set<std::string> ps;
            for (const auto& p : d.params)
                if (!ps.insert(p.name).second)
                    error("duplicate parameter '" + p.name + "' on constant " + d.name, d.span);
            check_term(d.body, nullptr);
            std::set<std::string> fv = free_variables(d.body);
            if (!fv.empty())
                error("constant '" + d.name + "' body may not contain equation variables", d.span);
        }
        for (const auto& s : prog.systems)
            for (const auto& eq : s.equations) check_term(eq.body, &s);
        for (const auto& c : prog.candidates) {
            for (const auto& t : c.tuple) check_term(t, nullptr);
            const SystemDef* s = prog.find_system(c.system);
            // Tuple arity against the desugared equation count; parametrised
            // families expand, so multiply the domains.
            if (s) {
                size_t n = 0;
                for (const auto& eq : s->equations) {
                    size_t k = 1;
                    for (const auto& p : eq.params) k *= static_cast<size_t>(p.domain);
                    n += k;
                }
                if (n != c.tuple.size())
                    error("candidate tuple '" + c.name + "' has " + std::to_string(c.tuple.size()) +
                              " component(s); system " + c.system + " defines " + std::to_string(n) +
                              " equation(s)",
                          c.span);
            }
        }
        check_const_recursion();
    }
};

}  // namespace

ParseResult parse_program(const std::string& text) {
    ParseResult res;
    Lexer lex(text, res.diags);
    std::vector<Token> toks = lex.run();
    if (has_errors(res.diags)) return res;
    Parser p(std::move(toks), res.diags);
    Program prog = p.parse_program_items();
    if (has_errors(res.diags)) return res;
    for (auto& s : prog.systems) {
        std::set<std::string> vars;
        for (const auto& eq : s.equations) vars.insert(eq.var);
        for (auto& eq : s.equations) eq.body = resolve_vars(eq.body, vars);
    }
    Validator v{prog, res.diags};
    v.run();
    if (has_errors(res.diags)) return res;
    res.program = std::move(prog);
    return res;
}

// ---------------------------------------------------------------------------
// Substitution and variable queries

namespace {

void action_names_scoped(const TermPtr& t, std::set<std::string>& out,
                         std::vector<std::string>& bound) {
    switch (t->kind) {
        case TermKind::Prefix:
            if (t->act.kind != ActKind::Tau &&
                std::find(bound.begin(), bound.end(), t->act.name) == bound.end())
                out.insert(t->act.name);
            action_names_scoped(t->kids[0], out, bound);
            break;
        case TermKind::Res:
            bound.push_back(t->name);
            action_names_scoped(t->kids[0], out, bound);
            bound.pop_back();
            break;
        default:
            for (const auto& k : t->kids) action_names_scoped(k, out, bound);
            break;
    }
}

TermPtr subst_go(const TermPtr& t, const std::map<std::string, TermPtr>& binding,
                 std::vector<std::string>& res_stack, Diagnostics* warnings,
                 std::set<std::string>& warned) {
    switch (t->kind) {
        case TermKind::Var: {
            auto it = binding.find(t->name);
            if (it == binding.end()) return t;
            if (warnings && !res_stack.empty()) {
                std::set<std::string> names = syntactic_action_names(it->second);
                for (const auto& r : res_stack) {
                    if (names.count(r) && warned.insert(t->name + "/" + r).second)
                        warnings->push_back(
                            {Severity::Warning,
                             "substitution for " + t->name + " places free name '" + r +
                                 "' under a restriction of '" + r + "'; no renaming is performed",
                             t->span});
                }
            }
            return it->second;
        }
        case TermKind::Nil:
        case TermKind::Const:
            return t;
        case TermKind::Res: {
            res_stack.push_back(t->name);
            TermPtr kid = subst_go(t->kids[0], binding, res_stack, warnings, warned);
            res_stack.pop_back();
            if (kid == t->kids[0]) return t;
            return mk_res(t->name, kid);
        }
        default: {
            std::vector<TermPtr> kids;
            bool changed = false;
            for (const auto& k : t->kids) {
                TermPtr nk = subst_go(k, binding, res_stack, warnings, warned);
                changed |= (nk != k);
                kids.push_back(nk);
            }
            if (!changed) return t;
            auto n = std::make_shared<Term>(*t);
            n->kids = std::move(kids);
            return finish(n);
        }
    }
}

}  // namespace

TermPtr substitute(const TermPtr& e, const std::map<std::string, TermPtr>& binding,
                   Diagnostics* warnings) {
    std::vector<std::string> res_stack;
    std::set<std::string> warned;
    return subst_go(e, binding, res_stack, warnings, warned);
}

std::set<std::string> free_variables(const TermPtr& e) {
    std::set<std::string> out;
    std::function<void(const TermPtr&)> go = [&](const TermPtr& t) {
        if (t->kind == TermKind::Var) out.insert(t->name);
        for (const auto& k : t->kids) go(k);
    };
    go(e);
    return out;
}

std::set<std::string> syntactic_action_names(const TermPtr& t) {
    std::set<std::string> out;
    std::vector<std::string> bound;
    action_names_scoped(t, out, bound);
    return out;
}

// ---------------------------------------------------------------------------
// Value desugaring

namespace {

struct Desugarer {
    const Program& src;
    Diagnostics& diags;
    // Equation-variable parameter signatures of the system currently expanded.
    const std::map<std::string, std::vector<Param>>* varsig = nullptr;

    std::optional<long> eval_raw(const IntExprPtr& e, const std::map<std::string, long>& env) {
        switch (e->kind) {
            case IntExpr::Kind::Lit: return e->lit;
            case IntExpr::Kind::Param: {
                auto it = env.find(e->param);
                if (it == env.end()) {
                    diags.push_back({Severity::Error,
                                     "unknown value variable '" + e->param + "'", e->span});
                    return std::nullopt;
                }
                return it->second;
            }
            case IntExpr::Kind::Add:
            case IntExpr::Kind::Sub: {
                auto a = eval_raw(e->lhs, env);
                auto b = eval_raw(e->rhs, env);
                if (!a || !b) return std::nullopt;
                return e->kind == IntExpr::Kind::Add ? *a + *b : *a - *b;
            }
        }
        return std::nullopt;
    }

    // Bare literals must lie inside the domain; composite arithmetic wraps.
    std::optional<long> eval(const IntExprPtr& e, const std::map<std::string, long>& env,
                             long domain, SourceSpan sp) {
        auto raw = eval_raw(e, env);
        if (!raw) return std::nullopt;
        if (e->kind == IntExpr::Kind::Lit && (*raw < 0 || *raw >= domain)) {
            diags.push_back({Severity::Error,
                             "value literal " + std::to_string(*raw) + " outside domain 0.." +
                                 std::to_string(domain - 1),
                             sp.line ? sp : e->span});
            return std::nullopt;
        }
        long m = ((*raw % domain) + domain) % domain;
        return m;
    }

    static std::string mangle(const std::string& base, const std::vector<long>& vals) {
        std::string out = base;
        for (long v : vals) out += "_" + std::to_string(v);
        return out;
    }

    std::optional<std::string> mangle_ref(const std::string& base, const std::vector<Param>& ps,
                                          const std::vector<IntExprPtr>& args,
                                          const std::map<std::string, long>& env, SourceSpan sp) {
        std::vector<long> vals;
        for (size_t i = 0; i < args.size(); ++i) {
            auto v = eval(args[i], env, ps[i].domain, sp);
            if (!v) return std::nullopt;
            vals.push_back(*v);
        }
        return mangle(base, vals);
    }

    TermPtr specialize(const TermPtr& t, const std::map<std::string, long>& env) {
        switch (t->kind) {
            case TermKind::Nil:
                return t;
            case TermKind::Prefix: {
                const Action& a = t->act;
                if (a.kind == ActKind::Input && !a.binder.empty()) {
                    const ChannelDecl* ch = src.find_channel(a.name);
                    if (!ch) {
                        diags.push_back({Severity::Error,
                                         "value input on channel '" + a.name +
                                             "' without a declared domain",
                                         t->span});
                        return mk_nil();
                    }
                    std::vector<TermPtr> summands;
                    for (long v = 0; v < ch->domain; ++v) {
                        std::map<std::string, long> env2 = env;
                        env2[a.binder] = v;
                        Action av;
                        av.kind = ActKind::Input;
                        av.name = mangle(a.name, {v});
                        summands.push_back(mk_prefix(av, specialize(t->kids[0], env2)));
                    }
                    if (summands.size() == 1) return summands[0];
                    return mk_sum(std::move(summands));
                }
                if (a.index) {
                    const ChannelDecl* ch = src.find_channel(a.name);
                    if (!ch) {
                        diags.push_back({Severity::Error,
                                         "indexed name on channel '" + a.name +
                                             "' without a declared domain",
                                         t->span});
                        return mk_nil();
                    }
                    auto v = eval(a.index, env, ch->domain, t->span);
                    if (!v) return mk_nil();
                    Action av;
                    av.kind = a.kind;
                    av.name = mangle(a.name, {*v});
                    return mk_prefix(av, specialize(t->kids[0], env));
                }
                if (a.kind != ActKind::Tau && src.find_channel(a.name)) {
                    diags.push_back({Severity::Error,
                                     "channel '" + a.name +
                                         "' carries a value; use " + a.name + "(z), " + a.name +
                                         "<e>, or '" + a.name + "<e>",
                                     t->span});
                    return mk_nil();
                }
                return mk_prefix(a, specialize(t->kids[0], env));
            }
            case TermKind::Sum: {
                std::vector<TermPtr> kids;
                for (const auto& k : t->kids) kids.push_back(specialize(k, env));
                return mk_sum(std::move(kids));
            }
            case TermKind::Par:
                return mk_par(specialize(t->kids[0], env), specialize(t->kids[1], env));
            case TermKind::Res: {
                TermPtr body = specialize(t->kids[0], env);
                const ChannelDecl* ch = src.find_channel(t->name);
                if (!ch) return mk_res(t->name, body);
                // Restricting a value channel restricts the whole indexed family.
                TermPtr acc = body;
                for (long v = ch->domain - 1; v >= 0; --v) acc = mk_res(mangle(t->name, {v}), acc);
                return acc;
            }
            case TermKind::Const: {
                const ConstDef* d = src.find_const(t->name);
                if (!d) return t;  // validated earlier; defensive
                if (d->params.empty()) return mk_const(t->name);
                auto nm = mangle_ref(t->name, d->params, t->args, env, t->span);
                if (!nm) return mk_nil();
                return mk_const(*nm);
            }
            case TermKind::Var: {
                if (!varsig) return t;
                auto it = varsig->find(t->name);
                if (it == varsig->end() || it->second.empty()) return mk_var(t->name);
                auto nm = mangle_ref(t->name, it->second, t->args, env, t->span);
                if (!nm) return mk_nil();
                return mk_var(*nm);
            }
        }
        return t;
    }

    // Enumerates valuations of a parameter list in row-major order.
    static std::vector<std::vector<long>> valuations(const std::vector<Param>& ps) {
        std::vector<std::vector<long>> out{{}};
        for (const auto& p : ps) {
            std::vector<std::vector<long>> next;
            for (const auto& v : out)
                for (long x = 0; x < p.domain; ++x) {
                    auto w = v;
                    w.push_back(x);
                    next.push_back(std::move(w));
                }
            out = std::move(next);
        }
        return out;
    }

    Program run() {
        Program out;
        std::set<std::string> names;
        auto claim = [&](const std::string& n, SourceSpan sp) {
            if (!names.insert(n).second)
                diags.push_back({Severity::Error, "desugared name collision on '" + n + "'", sp});
        };
        for (const auto& d : src.consts) {
            for (const auto& vals : valuations(d.params)) {
                std::map<std::string, long> env;
                for (size_t i = 0; i < vals.size(); ++i) env[d.params[i].name] = vals[i];
                ConstDef nd;
                nd.name = mangle(d.name, vals);
                nd.body = specialize(d.body, env);
                nd.span = d.span;
                nd.solution = d.solution;
                claim(nd.name, d.span);
                out.consts.push_back(std::move(nd));
            }
        }
        for (const auto& s : src.systems) {
            SystemDef ns;
            ns.name = s.name;
            ns.span = s.span;
            std::map<std::string, std::vector<Param>> sig;
            for (const auto& eq : s.equations) sig[eq.var] = eq.params;
            varsig = &sig;
            for (const auto& eq : s.equations) {
                for (const auto& vals : valuations(eq.params)) {
                    std::map<std::string, long> env;
                    for (size_t i = 0; i < vals.size(); ++i) env[eq.params[i].name] = vals[i];
                    Equation ne;
                    ne.var = mangle(eq.var, vals);
                    ne.body = specialize(eq.body, env);
                    ne.span = eq.span;
                    ns.equations.push_back(std::move(ne));
                }
            }
            varsig = nullptr;
            out.systems.push_back(std::move(ns));
        }
        for (const auto& c : src.candidates) {
            CandidateDef nc;
            nc.name = c.name;
            nc.system = c.system;
            nc.span = c.span;
            for (const auto& t : c.tuple) nc.tuple.push_back(specialize(t, {}));
            out.candidates.push_back(std::move(nc));
        }
        return out;
    }
};

}  // namespace

bool program_is_pure(const Program& p) {
    if (!p.channels.empty()) return false;
    for (const auto& c : p.consts)
        if (!c.params.empty() || !is_pure(c.body)) return false;
    for (const auto& s : p.systems)
        for (const auto& eq : s.equations)
            if (!eq.params.empty() || !is_pure(eq.body)) return false;
    for (const auto& c : p.candidates)
        for (const auto& t : c.tuple)
            if (!is_pure(t)) return false;
    return true;
}

DesugarResult desugar_values(const Program& p) {
    DesugarResult res;
    if (program_is_pure(p)) {
        res.program = p;
        return res;
    }
    Desugarer d{p, res.diags};
    Program out = d.run();
    if (has_errors(res.diags)) return res;
    res.program = std::move(out);
    return res;
}

// Parses a standalone process against a program: constants and channels are
// resolved there, and value sugar is expanded away, so the result is a pure
// closed term ready for exploration.
ParseTermResult parse_term(const std::string& text, const Program& context) {
    ParseTermResult res;
    Lexer lex(text, res.diags);
    std::vector<Token> toks = lex.run();
    if (has_errors(res.diags)) return res;
    Parser p(std::move(toks), res.diags);
    TermPtr t;
    try {
        t = p.parse_term();
        if (p.peek().kind != Tok::End) p.fail("trailing input after process");
    } catch (const ParseBail&) {
        return res;
    }
    Validator v{context, res.diags};
    v.check_term(t, nullptr);
    if (has_errors(res.diags)) return res;
    Desugarer d{context, res.diags};
    TermPtr pure = d.specialize(t, {});
    if (has_errors(res.diags)) return res;
    res.term = pure;
    return res;
}

}  // namespace usolv
