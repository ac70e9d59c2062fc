#include <gtest/gtest.h>

#include "gandalf/minig/parser.hpp"

using namespace gandalf::minig;

TEST(Parser, FunctionsAndParams) {
  const Program p = parse("int f(int a, int *b, int c[]) { return a; }\nint main() { return f(1, &x, 0); }");
  ASSERT_EQ(p.functions.size(), 2u);
  const Function& f = p.functions[0];
  EXPECT_EQ(f.name, "f");
  ASSERT_EQ(f.params.size(), 3u);
  EXPECT_FALSE(f.params[0].is_pointer);
  EXPECT_TRUE(f.params[1].is_pointer);
  EXPECT_TRUE(f.params[2].is_pointer);
  EXPECT_NE(p.find("main"), nullptr);
  EXPECT_EQ(p.find("nope"), nullptr);
}

TEST(Parser, Declarations) {
  const Program p = parse("int main() { int x = 3; int a[8]; int *q = &a[2]; int y; return 0; }");
  const auto& s = p.functions[0].body->stmts;
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[0]->kind, Stmt::Kind::Decl);
  EXPECT_EQ(s[0]->decl_kind, VarKind::Int);
  ASSERT_TRUE(s[0]->value);
  EXPECT_EQ(s[0]->value->value, 3);
  EXPECT_EQ(s[1]->decl_kind, VarKind::Array);
  EXPECT_EQ(s[1]->array_length, 8);
  EXPECT_EQ(s[2]->decl_kind, VarKind::Pointer);
  EXPECT_EQ(s[2]->value->kind, Expr::Kind::AddrOf);
  EXPECT_EQ(s[2]->value->lhs->kind, Expr::Kind::Index);
  EXPECT_FALSE(s[3]->value);
}

TEST(Parser, Precedence) {
  const Program p = parse("int main() { return 1 + 2 * 3 < 4 == 0; }");
  const Expr& e = *p.functions[0].body->stmts[0]->value;
  ASSERT_EQ(e.kind, Expr::Kind::Binary);
  EXPECT_EQ(e.binary_op, BinaryOp::Eq);
  const Expr& lt = *e.lhs;
  EXPECT_EQ(lt.binary_op, BinaryOp::Lt);
  EXPECT_EQ(lt.lhs->binary_op, BinaryOp::Add);
  EXPECT_EQ(lt.lhs->rhs->binary_op, BinaryOp::Mul);
}

TEST(Parser, LeftAssociative) {
  const Program p = parse("int main() { return 10 - 3 - 2; }");
  const Expr& e = *p.functions[0].body->stmts[0]->value;
  EXPECT_EQ(e.lhs->kind, Expr::Kind::Binary);
  EXPECT_EQ(e.rhs->value, 2);
}

TEST(Parser, StatementsAndComments) {
  const Program p = parse(R"(
// leading comment
int main() {
  int i = 0;
  while (i < 3) { i = i + 1; }   // loop
  if (i == 3) i = 0x10; else { i = -1; }
  *(&i) = 2;
  return i;
}
)");
  const auto& s = p.functions[0].body->stmts;
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[1]->kind, Stmt::Kind::While);
  EXPECT_EQ(s[2]->kind, Stmt::Kind::If);
  ASSERT_TRUE(s[2]->else_body);
  EXPECT_EQ(s[2]->body->value->value, 16);
  EXPECT_EQ(s[3]->kind, Stmt::Kind::Assign);
  EXPECT_EQ(s[3]->target->kind, Expr::Kind::Deref);
}

TEST(Parser, MissingExpressionPointsAtSemicolon) {
  try {
    parse("int main() {\n  int x = ;\n}");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.pos().line, 2);
    EXPECT_EQ(e.pos().column, 11);
  }
}

TEST(Parser, Rejects) {
  for (const char* src : {"int main() { return 1 }", "int main( { }", "int main() { int a[0]; }",
                          "int main() { x = ; }", "main() {}", "int main() { 3 = x; }", "int main() { @ }",
                          "int main() { return 99999999999; }"}) {
    EXPECT_THROW(parse(src), SyntaxError) << src;
  }
}
