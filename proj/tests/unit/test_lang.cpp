#include <set>

#include "doctest.h"
#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"
#include "tracefix/lang/program_index.hpp"

using namespace tracefix::lang;

TEST_CASE("single print statement") {
  Program p = parse("fn main(){ print(1+2); }");
  REQUIRE(p.functions.size() == 1);
  const Block& body = p.functions[0].body;
  REQUIRE(body.size() == 1);
  CHECK(body[0].kind == StmtKind::Print);
  CHECK(body[0].id == 0);
  CHECK(body[0].exprs[0] == Expr::binary(BinaryOp::Add, Expr::integer(1), Expr::integer(2)));
}

TEST_CASE("assignment to an undeclared variable") {
  CHECK_THROWS_AS(parse("fn main(){ x = 1; }"), NameError);
  try {
    parse("fn main(){ x = 1; }");
  } catch (const NameError& e) {
    CHECK(e.identifier() == "x");
    CHECK(e.line() == 1);
  }
}

TEST_CASE("call arity is checked") {
  CHECK_THROWS_AS(parse("fn f(a,b){ return a; } fn main(){ print(f(1)); }"), ArityError);
}

TEST_CASE("static checks") {
  CHECK_THROWS_AS(parse("fn main(){ let a = 1; let a = 2; }"), NameError);
  CHECK_THROWS_AS(parse("fn main(a){ let a = 1; }"), NameError);
  CHECK_THROWS_AS(parse("fn f(a, a){ }"), NameError);
  CHECK_THROWS_AS(parse("fn f(){ } fn f(){ }"), NameError);
  CHECK_THROWS_AS(parse("fn main(){ g(); }"), NameError);
  CHECK_THROWS_AS(parse("fn main(){ if (true) { let a = 1; } print(a); }"), NameError);
  CHECK_THROWS_AS(parse("fn main(){ for i in 0..3 { } print(i); }"), NameError);
  CHECK_NOTHROW(parse("fn main(){ if (true) { let a = 1; } else { let a = 2; } }"));
  CHECK_NOTHROW(parse("fn main(){ return f(); } fn f(){ return main(); }"));
}

TEST_CASE("syntax errors carry the line") {
  try {
    parse("fn main() {\n  let x = ;\n}\n");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("fn main() { print(\"abc); }"), SyntaxError);
  CHECK_THROWS_AS(parse("fn main() { 1 = 2; }"), SyntaxError);
  CHECK_THROWS_AS(parse("fn main() { let x = 99999999999999999999; }"), SyntaxError);
}

TEST_CASE("canonical printing") {
  CHECK(pretty_print(parse("fn main(){print(1);}")) == "fn main() {\n    print(1);\n}\n");
  std::string src =
      "fn f(a, b) {\n"
      "    let xs = [1, -2, \"q\\n\"];\n"
      "    if (a < b && !(a == 0)) {\n"
      "        xs[0] = (a + b) * 2 - a % b;\n"
      "    } else if (a > b) {\n"
      "        throw \"bad\";\n"
      "    } else {\n"
      "        return len(xs);\n"
      "    }\n"
      "    for i in 0..len(xs) - 1 {\n"
      "        print(xs[i]);\n"
      "    }\n"
      "    while (a - (b - 1) > 0) {\n"
      "        a = a - 1;\n"
      "    }\n"
      "    assert(a >= 0 || b <= 0);\n"
      "    f(b, a);\n"
      "    return;\n"
      "}\n";
  Program p = parse(src);
  CHECK(pretty_print(p) == src);
}

TEST_CASE("round trip and id density") {
  Program p = parse(
      "fn main(n) { let s = 0; // sum\n for i in 0..n { if (i % 2 == 0) { s = s + i; } } "
      "return s; }");
  Program q = parse(pretty_print(p));
  CHECK(same_structure(p, q));
  std::set<int> ids;
  for_each_stmt(q, [&](const Stmt& s, const std::string&) { ids.insert(s.id); });
  CHECK(static_cast<int>(ids.size()) == q.statement_count());
  CHECK(*ids.begin() == 0);
  CHECK(*ids.rbegin() == q.statement_count() - 1);
}

TEST_CASE("parse is deterministic") {
  std::string src = "fn main() { let a = [1, 2]; a[1] = a[0] - -3; print(a); }";
  Program a = parse(src);
  Program b = parse(src);
  CHECK(same_structure(a, b));
  CHECK(a.source_hash == b.source_hash);
  CHECK(a.source_hash.size() == 16);
}

TEST_CASE("negative literals and precedence") {
  CHECK(parse_expression("-5") == Expr::integer(-5));
  CHECK(parse_expression("-9223372036854775808") == Expr::integer(INT64_MIN));
  CHECK(pretty_print(parse_expression("a - (b - c)")) == "a - (b - c)");
  CHECK(pretty_print(parse_expression("(a - b) - c")) == "a - b - c");
  CHECK(pretty_print(parse_expression("(a + b) * c")) == "(a + b) * c");
  CHECK(pretty_print(parse_expression("-(a + 1)")) == "-(a + 1)");
  CHECK(pretty_print(parse_expression("!(a < b)")) == "!(a < b)");
  CHECK(pretty_print(parse_expression("a || b && c")) == "a || b && c");
  CHECK(pretty_print(parse_expression("(a || b) && c")) == "(a || b) && c");
}

TEST_CASE("locate") {
  Program p = parse("fn main(){\n  print(1);\n\n  print(2);\n}\n");
  CHECK(locate(p, "main", 2) == std::vector<int>{0});
  CHECK(locate(p, "main", 3).empty());
  CHECK(locate(p, "main", 4) == std::vector<int>{1});
  CHECK_THROWS_AS(locate(p, "nope", 2), UnknownFunction);
}

TEST_CASE("distinct lines never share a located statement") {
  Program p = parse(pretty_print(parse(
      "fn main(n){ let a = 0; while (a < n) { a = a + 1; if (a == 3) { print(a); } } return a; }")));
  std::set<int> seen;
  for (int line = 1; line <= 12; ++line)
    for (int id : locate(p, "main", line)) CHECK(seen.insert(id).second);
  CHECK(static_cast<int>(seen.size()) == p.statement_count());
}

TEST_CASE("program index scopes and refs") {
  Program p = parse(pretty_print(parse(
      "fn main(n){ let a = 0; for i in 0..n { let b = i; a = a + b; } let c = a; return c; }")));
  ProgramIndex idx(p);
  // ids: 0 let a, 1 for, 2 let b, 3 a = a + b, 4 let c, 5 return
  CHECK(idx.variables_in_scope(3) == std::vector<std::string>{"n", "a", "i", "b"});
  CHECK(idx.variables_in_scope(4) == std::vector<std::string>{"n", "a"});
  CHECK(idx.variables_in_scope(0) == std::vector<std::string>{"n"});
  CHECK(idx.info(3).parent == 1);
  CHECK(idx.is_descendant(3, 1));
  CHECK_FALSE(idx.is_descendant(4, 1));
  StmtRef r = idx.ref_of(3);
  CHECK(r.function == "main");
  CHECK(idx.resolve(r) == 3);
  CHECK(idx.resolve(StmtRef{"main", 99, 0}) == -1);
  CHECK(header_reads(idx.stmt(3)) == std::set<std::string>{"a", "b"});
  CHECK(header_reads(parse_statement("a[i] = 1;")) == std::set<std::string>{"a", "i"});
}
