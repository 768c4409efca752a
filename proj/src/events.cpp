#include "lazycore/events.hpp"

#include "lazycore/ast.hpp"

namespace lazycore {

const char* prom_kind_token(PromKind k) {
  switch (k) {
    case PromKind::Arg: return "ARG";
    case PromKind::Default: return "DEFAULT";
    case PromKind::Delayed: return "DELAYED";
  }
  return "?";
}

const char* expr_class_token(ExprClass c) {
  switch (c) {
    case ExprClass::Sym: return "SYM";
    case ExprClass::Const: return "CONST";
    case ExprClass::Call: return "CALL";
    case ExprClass::Other: return "OTHER";
  }
  return "?";
}

const char* locality_token(Locality l) {
  switch (l) {
    case Locality::None: return "NONE";
    case Locality::Local: return "LOCAL";
    case Locality::Lexical: return "LEXICAL";
    case Locality::Other: return "OTHERENV";
  }
  return "?";
}

std::optional<PromKind> prom_kind_from_token(std::string_view t) {
  if (t == "ARG") return PromKind::Arg;
  if (t == "DEFAULT") return PromKind::Default;
  if (t == "DELAYED") return PromKind::Delayed;
  return std::nullopt;
}

std::optional<ExprClass> expr_class_from_token(std::string_view t) {
  if (t == "SYM") return ExprClass::Sym;
  if (t == "CONST") return ExprClass::Const;
  if (t == "CALL") return ExprClass::Call;
  if (t == "OTHER") return ExprClass::Other;
  return std::nullopt;
}

std::optional<Locality> locality_from_token(std::string_view t) {
  if (t == "NONE") return Locality::None;
  if (t == "LOCAL") return Locality::Local;
  if (t == "LEXICAL") return Locality::Lexical;
  if (t == "OTHERENV") return Locality::Other;
  return std::nullopt;
}

std::optional<ErrCode> err_code_from_token(std::string_view t) {
  if (t == "UNBOUND_VARIABLE") return ErrCode::UnboundVariable;
  if (t == "NOT_A_CLOSURE") return ErrCode::NotAClosure;
  if (t == "TYPE_ERROR") return ErrCode::TypeError;
  if (t == "ARITY_ERROR") return ErrCode::ArityError;
  if (t == "MISSING_DEFAULT") return ErrCode::MissingDefault;
  if (t == "PROMISE_CYCLE") return ErrCode::PromiseCycle;
  if (t == "PARSE_ERROR_IN_EVAL") return ErrCode::ParseErrorInEval;
  if (t == "STEP_LIMIT_EXCEEDED") return ErrCode::StepLimitExceeded;
  return std::nullopt;
}

ExprClass classify_expr(const ExprPtr& e) {
  if (expr_as<Var>(e)) return ExprClass::Sym;
  if (expr_as<StrLit>(e)) return ExprClass::Const;
  if (expr_as<CallExpr>(e)) return ExprClass::Call;
  return ExprClass::Other;
}

}  // namespace lazycore
