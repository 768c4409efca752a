// Canonical source renderer. Output is fully determined by the tree shape:
// single spaces around `+` and `<-`, `, ` between arguments and parameters,
// `{ e1; e2 }` for blocks. Parentheses are inserted exactly where reparsing
// would otherwise change the tree:
//   - any Concat operand that is an Assign or a Function (function bodies
//     extend greedily to the right), and a right operand that is a Concat,
//     so left chains render flat;
//   - a function body that is an Assign;
//   - a callee that is not a Var, a Call, or a self-delimiting primary
//     (string, block, environment/substitute/eval/delayedAssign form).

#include "lazycore/deparse.hpp"

#include <variant>

namespace lazycore {

namespace {

bool is_kind(const ExprPtr& e, auto tag) {
  return std::holds_alternative<decltype(tag)>(e->node);
}

bool needs_parens_as_concat_left(const ExprPtr& e) {
  return is_kind(e, Assign{}) || is_kind(e, FunctionLit{});
}

bool needs_parens_as_concat_right(const ExprPtr& e) {
  return is_kind(e, Assign{}) || is_kind(e, FunctionLit{}) ||
         is_kind(e, Concat{});
}

bool needs_parens_as_callee(const ExprPtr& e) {
  return is_kind(e, Assign{}) || is_kind(e, FunctionLit{}) ||
         is_kind(e, Concat{});
}

void render(const ExprPtr& e, std::string& out);

void render_wrapped(const ExprPtr& e, bool parens, std::string& out) {
  if (parens) out.push_back('(');
  render(e, out);
  if (parens) out.push_back(')');
}

void render(const ExprPtr& e, std::string& out) {
  struct R {
    std::string& out;

    void operator()(const StrLit& x) { out += quote_string(x.text); }
    void operator()(const Var& x) { out += x.name; }
    void operator()(const Concat& x) {
      render_wrapped(x.lhs, needs_parens_as_concat_left(x.lhs), out);
      out += " + ";
      render_wrapped(x.rhs, needs_parens_as_concat_right(x.rhs), out);
    }
    void operator()(const Assign& x) {
      out += x.name;
      out += " <- ";
      render(x.rhs, out);
    }
    void operator()(const FunctionLit& x) {
      out += "function(";
      for (std::size_t i = 0; i < x.params.size(); ++i) {
        if (i) out += ", ";
        out += x.params[i].name;
        if (x.params[i].def) {
          out += " = ";
          render(x.params[i].def, out);
        }
      }
      out += ") ";
      render_wrapped(x.body, is_kind(x.body, Assign{}), out);
    }
    void operator()(const CallExpr& x) {
      render_wrapped(x.callee, needs_parens_as_callee(x.callee), out);
      out.push_back('(');
      for (std::size_t i = 0; i < x.args.size(); ++i) {
        if (i) out += ", ";
        render(x.args[i], out);
      }
      out.push_back(')');
    }
    void operator()(const EnvCapture&) { out += "environment()"; }
    void operator()(const SubstituteExpr& x) {
      out += "substitute(";
      out += x.name;
      out.push_back(')');
    }
    void operator()(const EvalExpr& x) {
      out += "eval(";
      render(x.code, out);
      out += ", ";
      render(x.env, out);
      out.push_back(')');
    }
    void operator()(const DelayedAssignExpr& x) {
      out += "delayedAssign(";
      out += x.name;
      out += ", ";
      render(x.code, out);
      out += ", ";
      render(x.env, out);
      out.push_back(')');
    }
    void operator()(const Block& x) {
      out += "{ ";
      for (std::size_t i = 0; i < x.exprs.size(); ++i) {
        if (i) out += "; ";
        render(x.exprs[i], out);
      }
      out += " }";
    }
  };
  std::visit(R{out}, e->node);
}

}  // namespace

std::string quote_string(const std::string& text) {
  std::string out;
  out.reserve(text.size() + 2);
  out.push_back('"');
  for (char c : text) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string deparse(const ExprPtr& e) {
  std::string out;
  render(e, out);
  return out;
}

}  // namespace lazycore
