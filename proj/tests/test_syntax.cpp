#include <doctest.h>

#include <string>

#include "gen.hpp"
#include "lazycore/ast.hpp"
#include "lazycore/deparse.hpp"
#include "lazycore/parser.hpp"

using namespace lazycore;

namespace {

ExprPtr reparse(const ExprPtr& e) { return parse(deparse(e)); }

SourceSpan span_of_error(const std::string& src) {
  try {
    parse(src);
  } catch (const ParseError& pe) {
    return pe.span;
  }
  FAIL("expected a parse error for: " << src);
  return {};
}

}  // namespace

TEST_CASE("parse literals, variables, concat") {
  auto e = parse("\"ab\"");
  REQUIRE(expr_as<StrLit>(e) != nullptr);
  CHECK(expr_as<StrLit>(e)->text == "ab");
  CHECK(e->span == SourceSpan{0, 4, 1, 1});

  e = parse("some_name.x");
  REQUIRE(expr_as<Var>(e) != nullptr);
  CHECK(expr_as<Var>(e)->name == "some_name.x");

  e = parse("\"a\" + \"b\" + \"c\"");
  auto* top = expr_as<Concat>(e);
  REQUIRE(top != nullptr);
  CHECK(expr_as<Concat>(top->lhs) != nullptr);  // left associative
  CHECK(expr_as<StrLit>(top->rhs)->text == "c");
}

TEST_CASE("string escapes decode and reject") {
  CHECK(expr_as<StrLit>(parse(R"("a\"b")"))->text == "a\"b");
  CHECK(expr_as<StrLit>(parse(R"("a\\b")"))->text == "a\\b");
  CHECK(expr_as<StrLit>(parse(R"("a\nb")"))->text == "a\nb");
  CHECK(expr_as<StrLit>(parse(R"("a\tb")"))->text == "a\tb");
  CHECK_THROWS_AS(parse(R"("a\rb")"), ParseError);
  CHECK_THROWS_AS(parse("\"unterminated"), ParseError);
}

TEST_CASE("assignment is right associative and needs a bare identifier") {
  auto e = parse("x <- y <- \"a\"");
  auto* outer = expr_as<Assign>(e);
  REQUIRE(outer != nullptr);
  CHECK(outer->name == "x");
  REQUIRE(expr_as<Assign>(outer->rhs) != nullptr);
  CHECK(expr_as<Assign>(outer->rhs)->name == "y");

  CHECK_THROWS_AS(parse("(x) <- \"a\""), ParseError);
  CHECK_THROWS_AS(parse("f(x) <- \"a\""), ParseError);
  CHECK_THROWS_AS(parse("x <<- \"a\""), ParseError);
}

TEST_CASE("call suffix binds tightest and chains") {
  auto e = parse("f(\"a\")(\"b\")");
  auto* outer = expr_as<CallExpr>(e);
  REQUIRE(outer != nullptr);
  REQUIRE(expr_as<CallExpr>(outer->callee) != nullptr);
  CHECK(expr_as<Var>(expr_as<CallExpr>(outer->callee)->callee)->name == "f");

  // The suffix inside a function body belongs to the body.
  e = parse("function(x) x(\"a\")");
  auto* fn = expr_as<FunctionLit>(e);
  REQUIRE(fn != nullptr);
  CHECK(expr_as<CallExpr>(fn->body) != nullptr);

  // A zero-argument call on a parenthesized function literal.
  e = parse("(function(x = x) x)()");
  auto* call = expr_as<CallExpr>(e);
  REQUIRE(call != nullptr);
  CHECK(call->args.empty());
  CHECK(expr_as<FunctionLit>(call->callee) != nullptr);
}

TEST_CASE("function parameters") {
  auto e = parse("function(a, b = \"d\") a");
  auto* fn = expr_as<FunctionLit>(e);
  REQUIRE(fn != nullptr);
  REQUIRE(fn->params.size() == 2);
  CHECK(fn->params[0].name == "a");
  CHECK(fn->params[0].def == nullptr);
  CHECK(fn->params[1].name == "b");
  REQUIRE(fn->params[1].def != nullptr);
  CHECK(expr_as<StrLit>(fn->params[1].def)->text == "d");

  CHECK_THROWS_AS(parse("function(a, a) a"), ParseError);
  CHECK_THROWS_AS(parse("function(eval) eval"), ParseError);
}

TEST_CASE("blocks allow a trailing semicolon and must be non-empty") {
  auto e = parse("{ \"a\"; \"b\"; }");
  auto* b = expr_as<Block>(e);
  REQUIRE(b != nullptr);
  CHECK(b->exprs.size() == 2);
  CHECK_THROWS_AS(parse("{ }"), ParseError);
  CHECK_THROWS_AS(parse("{ \"a\";; \"b\" }"), ParseError);
}

TEST_CASE("special forms parse and reject misuse") {
  CHECK(expr_as<EnvCapture>(parse("environment()")) != nullptr);
  CHECK(expr_as<SubstituteExpr>(parse("substitute(x)"))->name == "x");
  CHECK(expr_as<EvalExpr>(parse("eval(\"x\", e)")) != nullptr);
  auto* d = expr_as<DelayedAssignExpr>(parse("delayedAssign(z, \"a\", e)"));
  REQUIRE(d != nullptr);
  CHECK(d->name == "z");

  CHECK_THROWS_AS(parse("substitute(\"a\")"), ParseError);
  CHECK_THROWS_AS(parse("substitute(eval)"), ParseError);
  CHECK_THROWS_AS(parse("environment(x)"), ParseError);
  CHECK_THROWS_AS(parse("eval(\"x\")"), ParseError);
  CHECK_THROWS_AS(parse("delayedAssign(\"z\", \"a\", e)"), ParseError);
  CHECK_THROWS_AS(parse("eval <- \"a\""), ParseError);
  CHECK_THROWS_AS(parse("function"), ParseError);
}

TEST_CASE("comments and whitespace are insignificant") {
  auto e = parse("{ x <- \"a\"; # bind\n  x }");
  CHECK(expr_as<Block>(e) != nullptr);
  CHECK(equal_ignoring_spans(e, parse("{x<-\"a\";x}")));
}

TEST_CASE("junk after the program is an error") {
  CHECK_THROWS_AS(parse("\"a\" \"b\""), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("x <-"), ParseError);
}

TEST_CASE("parse errors carry the offending span") {
  SourceSpan s = span_of_error("x <- \x01");
  CHECK(s.line == 1);
  CHECK(s.col == 6);

  s = span_of_error("{ \"a\";\n  @ }");
  CHECK(s.line == 2);
  CHECK(s.col == 3);
}

TEST_CASE("spans nest and use byte offsets with 1-based line and column") {
  auto e = parse("{ x <- \"a\";\n  x + \"b\" }");
  auto* b = expr_as<Block>(e);
  REQUIRE(b != nullptr);
  const auto& assign = b->exprs[0];
  CHECK(assign->span.begin == 2);
  CHECK(assign->span.end == 10);
  CHECK(assign->span.line == 1);
  CHECK(assign->span.col == 3);
  const auto& concat = b->exprs[1];
  CHECK(concat->span.line == 2);
  CHECK(concat->span.col == 3);
  CHECK(concat->span.begin >= e->span.begin);
  CHECK(concat->span.end <= e->span.end);
}

TEST_CASE("deparse renders canonically") {
  CHECK(deparse(parse("\"a\"+\"b\"")) == "\"a\" + \"b\"");
  CHECK(deparse(parse("x<-y<-\"a\"")) == "x <- y <- \"a\"");
  CHECK(deparse(parse("\"a\" + (\"b\" + \"c\")")) == "\"a\" + (\"b\" + \"c\")");
  CHECK(deparse(parse("(\"a\" + \"b\") + \"c\"")) == "\"a\" + \"b\" + \"c\"");
  CHECK(deparse(parse("(x <- \"a\") + \"b\"")) == "(x <- \"a\") + \"b\"");
  CHECK(deparse(parse("function( x , y = \"d\" ) x")) ==
        "function(x, y = \"d\") x");
  CHECK(deparse(parse("function(x) x <- \"a\"")) ==
        "function(x) (x <- \"a\")");
  CHECK(deparse(parse("(function(x) x)(\"a\")")) == "(function(x) x)(\"a\")");
  CHECK(deparse(parse("{x;y}")) == "{ x; y }");
  CHECK(deparse(parse("{x;}")) == "{ x }");
  CHECK(deparse(parse("eval ( \"x\" ,e )")) == "eval(\"x\", e)");
  CHECK(deparse(parse("delayedAssign(z,\"a\",e)")) ==
        "delayedAssign(z, \"a\", e)");
  CHECK(deparse(parse("substitute( x )")) == "substitute(x)");
  CHECK(deparse(parse("environment ( )")) == "environment()");
  CHECK(deparse(parse("((x))")) == "x");
  CHECK(deparse(parse(R"("q\"t\\n\n\t")")) == R"("q\"t\\n\n\t")");
}

TEST_CASE("deparse of every golden-relevant shape reparses equal") {
  const char* sources[] = {
      "{ f <- function(x) x + x; f((y <- \"h\")) }",
      "(function(x = x) x)()",
      "{ g <- function(a, b) a; g(\"v\", nonexistent) }",
      "{ e <- environment(); delayedAssign(z, \"a\" + \"b\", e); z }",
      "{ f <- function(x) substitute(x); f(\"a\" + \"b\") }",
      "eval(\"\\\"a\\\" + \\\"b\\\"\", environment())",
      "\"s\"(\"a\")",
      "{ f }(\"a\")",
      "x <- function(y) y",
      "f(function(x) x, \"b\")",
  };
  for (const char* src : sources) {
    ExprPtr e = parse(src);
    CAPTURE(src);
    CHECK(equal_ignoring_spans(e, reparse(e)));
    CHECK(deparse(reparse(e)) == deparse(e));
  }
}

TEST_CASE("round trip holds on random trees") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 600; ++seed) {
    testgen::Rng rng(seed);
    ExprPtr e = testgen::gen_any_tree(rng, 4);
    std::string text = deparse(e);
    CAPTURE(seed);
    CAPTURE(text);
    ExprPtr back;
    REQUIRE_NOTHROW(back = parse(text));
    REQUIRE(equal_ignoring_spans(e, back));
    // Rendering is a fixed point after one round.
    CHECK(deparse(back) == text);
    ++checked;
  }
  CHECK(checked == 600);
}

TEST_CASE("parsing the same text twice gives identical trees and spans") {
  const char* src = "{ f <- function(x) x + x; f((y <- \"h\")) }";
  auto a = parse(src);
  auto b = parse(src);
  CHECK(equal_ignoring_spans(a, b));
  CHECK(a->span == b->span);
  CHECK(deparse(a) == deparse(b));
}
