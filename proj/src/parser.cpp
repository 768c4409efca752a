// Recursive-descent parser for the surface language.
//
//   program  := expr EOF
//   expr     := assign
//   assign   := IDENT "<-" assign | concat
//   concat   := postfix { "+" postfix }            (left associative)
//   postfix  := primary { "(" [expr {"," expr}] ")" }
//   primary  := STRING | IDENT | "(" expr ")" | block | function | special
//   block    := "{" expr { ";" expr } [";"] "}"
//   function := "function" "(" [param {"," param}] ")" expr
//   param    := IDENT ["=" expr]
//   special  := "environment" "(" ")"
//             | "substitute" "(" IDENT ")"
//             | "eval" "(" expr "," expr ")"
//             | "delayedAssign" "(" IDENT "," expr "," expr ")"
//
// Identifiers are [A-Za-z_][A-Za-z0-9_.]* and may not be reserved words.
// Strings are double-quoted with exactly the escapes \" \\ \n \t.
// Comments run from '#' to end of line. Whitespace is insignificant.

#include "lazycore/parser.hpp"

#include <array>
#include <cctype>
#include <utility>

namespace lazycore {

namespace {

enum class Tok {
  Ident,
  Str,
  KwFunction,
  KwEnvironment,
  KwSubstitute,
  KwEval,
  KwDelayedAssign,
  Arrow,  // <-
  Plus,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Semi,
  Comma,
  Eq,
  End,
};

struct Token {
  Tok kind;
  std::string text;  // identifier name or decoded string contents
  SourceSpan span;
};

constexpr std::array<std::pair<std::string_view, Tok>, 5> kKeywords = {{
    {"function", Tok::KwFunction},
    {"environment", Tok::KwEnvironment},
    {"substitute", Tok::KwSubstitute},
    {"eval", Tok::KwEval},
    {"delayedAssign", Tok::KwDelayedAssign},
}};

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9') || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_trivia();
    std::uint32_t line = line_, col = col_;
    std::uint32_t begin = pos_;
    auto span_from = [&](std::uint32_t) {
      return SourceSpan{begin, pos_, line, col};
    };
    if (pos_ >= src_.size()) return {Tok::End, "", span_from(begin)};

    char c = src_[pos_];
    if (c == '"') return lex_string(begin, line, col);
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
      std::string_view word = src_.substr(begin, pos_ - begin);
      for (auto [kw, tok] : kKeywords)
        if (word == kw) return {tok, std::string(word), span_from(begin)};
      return {Tok::Ident, std::string(word), span_from(begin)};
    }
    switch (c) {
      case '+':
        advance();
        return {Tok::Plus, "+", span_from(begin)};
      case '(':
        advance();
        return {Tok::LParen, "(", span_from(begin)};
      case ')':
        advance();
        return {Tok::RParen, ")", span_from(begin)};
      case '{':
        advance();
        return {Tok::LBrace, "{", span_from(begin)};
      case '}':
        advance();
        return {Tok::RBrace, "}", span_from(begin)};
      case ';':
        advance();
        return {Tok::Semi, ";", span_from(begin)};
      case ',':
        advance();
        return {Tok::Comma, ",", span_from(begin)};
      case '=':
        advance();
        return {Tok::Eq, "=", span_from(begin)};
      case '<': {
        advance();
        if (pos_ < src_.size() && src_[pos_] == '<') {
          advance();
          if (pos_ < src_.size() && src_[pos_] == '-') advance();
          throw ParseError("'<<' is reserved and not part of the language",
                           SourceSpan{begin, pos_, line, col});
        }
        if (pos_ < src_.size() && src_[pos_] == '-') {
          advance();
          return {Tok::Arrow, "<-", span_from(begin)};
        }
        throw ParseError("expected '<-'", SourceSpan{begin, pos_, line, col});
      }
      default:
        break;
    }
    advance();
    throw ParseError("unexpected character", SourceSpan{begin, pos_, line, col});
  }

 private:
  void advance() {
    if (pos_ < src_.size()) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token lex_string(std::uint32_t begin, std::uint32_t line, std::uint32_t col) {
    advance();  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= src_.size())
        throw ParseError("unterminated string literal",
                         SourceSpan{begin, pos_, line, col});
      char c = src_[pos_];
      if (c == '"') {
        advance();
        return {Tok::Str, std::move(out), SourceSpan{begin, pos_, line, col}};
      }
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size())
          throw ParseError("unterminated string literal",
                           SourceSpan{begin, pos_, line, col});
        char e = src_[pos_];
        switch (e) {
          case '"':
            out.push_back('"');
            break;
          case '\\':
            out.push_back('\\');
            break;
          case 'n':
            out.push_back('\n');
            break;
          case 't':
            out.push_back('\t');
            break;
          default:
            throw ParseError(
                "unknown escape sequence in string literal",
                SourceSpan{static_cast<std::uint32_t>(pos_ - 1), pos_ + 1,
                           line_, col_ > 0 ? col_ - 1 : col_});
        }
        advance();
      } else {
        out.push_back(c);
        advance();
      }
    }
  }

  std::string_view src_;
  std::uint32_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { bump(); }

  ExprPtr parse_program() {
    ExprPtr e = parse_expr();
    expect(Tok::End, "expected end of input");
    return e;
  }

 private:
  void bump() {
    cur_ = have_peek_ ? peek_ : lex_.next();
    have_peek_ = false;
  }

  const Token& peek() {
    if (!have_peek_) {
      peek_ = lex_.next();
      have_peek_ = true;
    }
    return peek_;
  }

  Token expect(Tok kind, const char* msg) {
    if (cur_.kind != kind) throw ParseError(msg, cur_.span);
    Token t = cur_;
    bump();
    return t;
  }

  [[noreturn]] void fail(const char* msg) { throw ParseError(msg, cur_.span); }

  static SourceSpan join(SourceSpan a, SourceSpan b) {
    return SourceSpan{a.begin, b.end, a.line, a.col};
  }

  ExprPtr parse_expr() { return parse_assign(); }

  ExprPtr parse_assign() {
    if (cur_.kind == Tok::Ident && peek().kind == Tok::Arrow) {
      Token name = cur_;
      bump();  // identifier
      bump();  // arrow
      ExprPtr rhs = parse_assign();
      return make_expr(Assign{name.text, rhs}, join(name.span, rhs->span));
    }
    return parse_concat();
  }

  ExprPtr parse_concat() {
    ExprPtr lhs = parse_postfix();
    while (cur_.kind == Tok::Plus) {
      bump();
      ExprPtr rhs = parse_postfix();
      lhs = make_expr(Concat{lhs, rhs}, join(lhs->span, rhs->span));
    }
    return lhs;
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (cur_.kind == Tok::LParen) {
      bump();
      std::vector<ExprPtr> args;
      if (cur_.kind != Tok::RParen) {
        args.push_back(parse_expr());
        while (cur_.kind == Tok::Comma) {
          bump();
          args.push_back(parse_expr());
        }
      }
      Token close = expect(Tok::RParen, "expected ')' in call");
      e = make_expr(CallExpr{e, std::move(args)}, join(e->span, close.span));
    }
    return e;
  }

  ExprPtr parse_primary() {
    switch (cur_.kind) {
      case Tok::Str: {
        Token t = cur_;
        bump();
        return make_expr(StrLit{t.text}, t.span);
      }
      case Tok::Ident: {
        Token t = cur_;
        bump();
        return make_expr(Var{t.text}, t.span);
      }
      case Tok::LParen: {
        bump();
        ExprPtr e = parse_expr();
        expect(Tok::RParen, "expected ')'");
        return e;
      }
      case Tok::LBrace:
        return parse_block();
      case Tok::KwFunction:
        return parse_function();
      case Tok::KwEnvironment: {
        Token kw = cur_;
        bump();
        expect(Tok::LParen, "expected '(' after 'environment'");
        Token close = expect(Tok::RParen, "'environment' takes no arguments");
        return make_expr(EnvCapture{}, join(kw.span, close.span));
      }
      case Tok::KwSubstitute: {
        Token kw = cur_;
        bump();
        expect(Tok::LParen, "expected '(' after 'substitute'");
        if (cur_.kind != Tok::Ident)
          fail("'substitute' takes a bare identifier");
        Token name = cur_;
        bump();
        Token close = expect(Tok::RParen, "expected ')' after identifier");
        return make_expr(SubstituteExpr{name.text}, join(kw.span, close.span));
      }
      case Tok::KwEval: {
        Token kw = cur_;
        bump();
        expect(Tok::LParen, "expected '(' after 'eval'");
        ExprPtr code = parse_expr();
        expect(Tok::Comma, "'eval' takes two arguments");
        ExprPtr env = parse_expr();
        Token close = expect(Tok::RParen, "expected ')' after 'eval' arguments");
        return make_expr(EvalExpr{code, env}, join(kw.span, close.span));
      }
      case Tok::KwDelayedAssign: {
        Token kw = cur_;
        bump();
        expect(Tok::LParen, "expected '(' after 'delayedAssign'");
        if (cur_.kind != Tok::Ident)
          fail("'delayedAssign' takes a bare identifier first");
        Token name = cur_;
        bump();
        expect(Tok::Comma, "'delayedAssign' takes three arguments");
        ExprPtr code = parse_expr();
        expect(Tok::Comma, "'delayedAssign' takes three arguments");
        ExprPtr env = parse_expr();
        Token close =
            expect(Tok::RParen, "expected ')' after 'delayedAssign' arguments");
        return make_expr(DelayedAssignExpr{name.text, code, env},
                         join(kw.span, close.span));
      }
      default:
        fail("expected an expression");
    }
  }

  ExprPtr parse_function() {
    Token kw = cur_;
    bump();
    expect(Tok::LParen, "expected '(' after 'function'");
    std::vector<Param> params;
    if (cur_.kind != Tok::RParen) {
      params.push_back(parse_param());
      while (cur_.kind == Tok::Comma) {
        bump();
        params.push_back(parse_param());
      }
    }
    expect(Tok::RParen, "expected ')' after parameter list");
    for (std::size_t i = 0; i < params.size(); ++i)
      for (std::size_t j = i + 1; j < params.size(); ++j)
        if (params[i].name == params[j].name)
          throw ParseError("duplicate parameter name '" + params[i].name + "'",
                           kw.span);
    ExprPtr body = parse_expr();
    return make_expr(FunctionLit{std::move(params), body},
                     join(kw.span, body->span));
  }

  Param parse_param() {
    if (cur_.kind != Tok::Ident) fail("expected parameter name");
    Token name = cur_;
    bump();
    ExprPtr def;
    if (cur_.kind == Tok::Eq) {
      bump();
      def = parse_expr();
    }
    return Param{name.text, def};
  }

  ExprPtr parse_block() {
    Token open = cur_;
    bump();
    std::vector<ExprPtr> exprs;
    exprs.push_back(parse_expr());
    while (cur_.kind == Tok::Semi) {
      bump();
      if (cur_.kind == Tok::RBrace) break;  // optional trailing semicolon
      exprs.push_back(parse_expr());
    }
    Token close = expect(Tok::RBrace, "expected '}' to close block");
    return make_expr(Block{std::move(exprs)}, join(open.span, close.span));
  }

  Lexer lex_;
  Token cur_;
  Token peek_;
  bool have_peek_ = false;
};

}  // namespace

bool is_reserved_word(std::string_view word) {
  for (auto [kw, tok] : kKeywords) {
    (void)tok;
    if (word == kw) return true;
  }
  return false;
}

ExprPtr parse(std::string_view source) {
  Parser p(source);
  return p.parse_program();
}

}  // namespace lazycore
