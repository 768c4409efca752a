#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "lazycore/span.hpp"

namespace lazycore {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// A string literal. `text` holds the decoded characters, not the source
// spelling.
struct StrLit {
  std::string text;
};

struct Var {
  std::string name;
};

// String concatenation, `lhs + rhs`.
struct Concat {
  ExprPtr lhs;
  ExprPtr rhs;
};

// `name <- rhs`. The left-hand side is always a bare identifier.
struct Assign {
  std::string name;
  ExprPtr rhs;
};

// One formal parameter; `def` is null when the parameter has no default.
struct Param {
  std::string name;
  ExprPtr def;
};

struct FunctionLit {
  std::vector<Param> params;
  ExprPtr body;
};

struct CallExpr {
  ExprPtr callee;
  std::vector<ExprPtr> args;
};

// `environment()` — reifies the current environment.
struct EnvCapture {};

// `substitute(name)` — the unevaluated expression of the promise bound to
// `name`, rendered back to source text.
struct SubstituteExpr {
  std::string name;
};

// `eval(code, env)` — parse the string `code` and evaluate it in `env`.
struct EvalExpr {
  ExprPtr code;
  ExprPtr env;
};

// `delayedAssign(name, code, env)` — bind `name` in `env` to a fresh
// promise over `code`. The code operand is never evaluated here.
struct DelayedAssignExpr {
  std::string name;
  ExprPtr code;
  ExprPtr env;
};

// `{ e1; ...; en }`, non-empty.
struct Block {
  std::vector<ExprPtr> exprs;
};

using ExprNode = std::variant<StrLit, Var, Concat, Assign, FunctionLit,
                              CallExpr, EnvCapture, SubstituteExpr, EvalExpr,
                              DelayedAssignExpr, Block>;

struct Expr {
  ExprNode node;
  SourceSpan span;
};

ExprPtr make_expr(ExprNode node, SourceSpan span);

template <class T>
const T* expr_as(const ExprPtr& e) {
  return e ? std::get_if<T>(&e->node) : nullptr;
}

// Structural equality; spans are ignored so a reparse of deparsed text can be
// compared against the original tree.
bool equal_ignoring_spans(const ExprPtr& a, const ExprPtr& b);

}  // namespace lazycore
