// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Process terms, the text format, and the value-passing desugaring.
//
// Grammar (binding tightest to loosest: prefix > restriction > parallel > sum):
//
//   program    := { channel | constdef | systemdef | candidates }
//   channel    := "channel" name ":" INT ".." INT ";"
//   constdef   := "const" UNAME [ "(" params ")" ] "=" term ";"
//   systemdef  := "system" UNAME "{" { UNAME [ "(" params ")" ] "=" term ";" } "}"
//   candidates := "candidates" UNAME "for" UNAME "=" "(" term { "," term } ")" ";"
//   term       := par { "+" par }
//   par        := restr { "|" restr }
//   restr      := "new" name { "," name } "in" restr | "(" "^" name { "," name } ")" restr | prefix
//   prefix     := action [ "." prefix ] | atom
//   action     := "tau" | name [ "(" name ")" | "<" iexpr ">" ] | "'" name [ "<" iexpr ">" ]
//   atom       := "0" | "(" term ")" | UNAME [ "(" iexpr { "," iexpr } ")" ]
//   iexpr      := iatom { ("+"|"-") iatom } ; iatom := INT | name | "(" iexpr ")"
//
// "--" starts a line comment. Channel and value-parameter names are lowercase
// identifiers; constant, system, and equation-variable names are capitalized.
// A bare action abbreviates a prefix of 0 (a + 'b means a.0 + 'b.0).

#ifndef USOLV_SYNTAX_HPP
#define USOLV_SYNTAX_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "usolv/diag.hpp"

namespace usolv {

// ---------------------------------------------------------------------------
// Value expressions (sugar only; gone after desugaring)

struct IntExpr;
using IntExprPtr = std::shared_ptr<const IntExpr>;

struct IntExpr {
    enum class Kind { Lit, Param, Add, Sub } kind = Kind::Lit;
    long lit = 0;
    std::string param;
    IntExprPtr lhs, rhs;
    SourceSpan span;
};

IntExprPtr int_lit(long v);
IntExprPtr int_param(const std::string& name);
IntExprPtr int_add(IntExprPtr a, IntExprPtr b);
IntExprPtr int_sub(IntExprPtr a, IntExprPtr b);
std::string pretty(const IntExprPtr& e);

// ---------------------------------------------------------------------------
// Actions

enum class ActKind { Input, Output, Tau };

struct Action {
    ActKind kind = ActKind::Tau;
    std::string name;      // channel; empty for tau
    IntExprPtr index;      // c<e> / 'c<e>, sugar
    std::string binder;    // c(z), sugar (Input only)

    bool is_sugar() const { return index != nullptr || !binder.empty(); }
    bool complements(const Action& o) const;
    std::string text() const;
};

// Total order on plain actions: tau, then by name, inputs before outputs.
int action_cmp(const Action& a, const Action& b);

// ---------------------------------------------------------------------------
// Terms (processes and equation expressions share one node type)

enum class TermKind { Nil, Prefix, Sum, Par, Res, Const, Var };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    TermKind kind = TermKind::Nil;
    Action act;                     // Prefix
    std::vector<TermPtr> kids;      // Prefix: 1, Sum: >= 2, Par: 2, Res: 1
    std::string name;               // Res channel / Const name / Var name
    std::vector<IntExprPtr> args;   // Const/Var arguments, sugar
    SourceSpan span;
    size_t hash = 0;                // structural, set at construction
};

TermPtr mk_nil();
TermPtr mk_prefix(const Action& a, TermPtr cont);
TermPtr mk_sum(std::vector<TermPtr> summands);  // flattens nothing; kids as given
TermPtr mk_par(TermPtr l, TermPtr r);
TermPtr mk_res(const std::string& name, TermPtr body);
TermPtr mk_const(const std::string& name, std::vector<IntExprPtr> args = {});
TermPtr mk_var(const std::string& name, std::vector<IntExprPtr> args = {});

bool term_eq(const TermPtr& a, const TermPtr& b);

// Pure terms carry no value sugar and no Var arguments.
bool is_pure(const TermPtr& t);

std::string pretty(const TermPtr& t);

// ---------------------------------------------------------------------------
// Programs

struct Param {
    std::string name;
    long domain = 0;  // values 0..domain-1
};

struct ConstDef {
    std::string name;
    std::vector<Param> params;
    TermPtr body;
    bool solution = false;  // generated syntactic-solution constant
    SourceSpan span;
};

struct ChannelDecl {
    std::string name;
    long domain = 0;
    SourceSpan span;
};

struct Equation {
    std::string var;
    std::vector<Param> params;
    TermPtr body;
    SourceSpan span;
};

struct SystemDef {
    std::string name;
    std::vector<Equation> equations;
    SourceSpan span;
};

struct CandidateDef {
    std::string name;
    std::string system;
    std::vector<TermPtr> tuple;
    SourceSpan span;
};

struct Program {
    std::vector<ChannelDecl> channels;
    std::vector<ConstDef> consts;
    std::vector<SystemDef> systems;
    std::vector<CandidateDef> candidates;

    const ChannelDecl* find_channel(const std::string& n) const;
    const ConstDef* find_const(const std::string& n) const;
    const SystemDef* find_system(const std::string& n) const;
    const CandidateDef* find_candidates(const std::string& n) const;
};

std::string pretty(const Program& p);

// ---------------------------------------------------------------------------
// Parsing

struct ParseResult {
    std::optional<Program> program;
    Diagnostics diags;
};

// Parses, resolves equation variables, and validates (summand guardedness,
// unknown constants, arities, duplicate names, unguarded constant recursion).
ParseResult parse_program(const std::string& text);

// Parses a single term in the context of a program (its channels and
// constants); used by the CLI for --term/--lhs/--rhs and by tests.
struct ParseTermResult {
    TermPtr term;
    Diagnostics diags;
};
ParseTermResult parse_term(const std::string& text, const Program& context);

// ---------------------------------------------------------------------------
// Operations

// Simultaneous substitution of equation variables. Purely syntactic, no
// renaming; appends a warning when a replacement's action names land under a
// matching restriction.
TermPtr substitute(const TermPtr& e, const std::map<std::string, TermPtr>& binding,
                   Diagnostics* warnings = nullptr);

std::set<std::string> free_variables(const TermPtr& e);

// Action names syntactically occurring in the term itself (constants opaque).
std::set<std::string> syntactic_action_names(const TermPtr& t);

struct DesugarResult {
    std::optional<Program> program;
    Diagnostics diags;
};

// Expands value passing into pure CCS: parametrised constants/equations become
// indexed families, c(z) becomes a sum over the channel domain, 'c<e> and c<e>
// become indexed names, and restriction of a declared channel restricts the
// whole family. Result contains no channel declarations and no sugar.
DesugarResult desugar_values(const Program& p);

bool program_is_pure(const Program& p);

}  // namespace usolv

#endif
