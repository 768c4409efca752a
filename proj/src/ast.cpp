#include "lazycore/ast.hpp"

#include <string>

#include "lazycore/span.hpp"

namespace lazycore {

std::string to_string(const SourceSpan& s) {
  return std::to_string(s.begin) + ":" + std::to_string(s.end) + ":" +
         std::to_string(s.line) + ":" + std::to_string(s.col);
}

ExprPtr make_expr(ExprNode node, SourceSpan span) {
  return std::make_shared<Expr>(Expr{std::move(node), span});
}

bool equal_ignoring_spans(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->node.index() != b->node.index()) return false;

  struct Eq {
    const ExprPtr& other;

    bool operator()(const StrLit& x) const {
      return expr_as<StrLit>(other)->text == x.text;
    }
    bool operator()(const Var& x) const {
      return expr_as<Var>(other)->name == x.name;
    }
    bool operator()(const Concat& x) const {
      const auto* o = expr_as<Concat>(other);
      return equal_ignoring_spans(x.lhs, o->lhs) &&
             equal_ignoring_spans(x.rhs, o->rhs);
    }
    bool operator()(const Assign& x) const {
      const auto* o = expr_as<Assign>(other);
      return x.name == o->name && equal_ignoring_spans(x.rhs, o->rhs);
    }
    bool operator()(const FunctionLit& x) const {
      const auto* o = expr_as<FunctionLit>(other);
      if (x.params.size() != o->params.size()) return false;
      for (std::size_t i = 0; i < x.params.size(); ++i) {
        if (x.params[i].name != o->params[i].name) return false;
        const bool has_a = x.params[i].def != nullptr;
        const bool has_b = o->params[i].def != nullptr;
        if (has_a != has_b) return false;
        if (has_a && !equal_ignoring_spans(x.params[i].def, o->params[i].def))
          return false;
      }
      return equal_ignoring_spans(x.body, o->body);
    }
    bool operator()(const CallExpr& x) const {
      const auto* o = expr_as<CallExpr>(other);
      if (!equal_ignoring_spans(x.callee, o->callee)) return false;
      if (x.args.size() != o->args.size()) return false;
      for (std::size_t i = 0; i < x.args.size(); ++i)
        if (!equal_ignoring_spans(x.args[i], o->args[i])) return false;
      return true;
    }
    bool operator()(const EnvCapture&) const { return true; }
    bool operator()(const SubstituteExpr& x) const {
      return expr_as<SubstituteExpr>(other)->name == x.name;
    }
    bool operator()(const EvalExpr& x) const {
      const auto* o = expr_as<EvalExpr>(other);
      return equal_ignoring_spans(x.code, o->code) &&
             equal_ignoring_spans(x.env, o->env);
    }
    bool operator()(const DelayedAssignExpr& x) const {
      const auto* o = expr_as<DelayedAssignExpr>(other);
      return x.name == o->name && equal_ignoring_spans(x.code, o->code) &&
             equal_ignoring_spans(x.env, o->env);
    }
    bool operator()(const Block& x) const {
      const auto* o = expr_as<Block>(other);
      if (x.exprs.size() != o->exprs.size()) return false;
      for (std::size_t i = 0; i < x.exprs.size(); ++i)
        if (!equal_ignoring_spans(x.exprs[i], o->exprs[i])) return false;
      return true;
    }
  };

  return std::visit(Eq{b}, a->node);
}

}  // namespace lazycore
