#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace gandalf::minig {

struct SourcePos {
  int line = 1;
  int column = 1;
};

enum class BinaryOp { Add, Sub, Mul, And, Or, Shl, Lt, Gt, Le, Ge, Eq, Ne };
enum class UnaryOp { Neg, Not };

const char* to_string(BinaryOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind {
    IntLit,   // value
    Var,      // name
    Index,    // name[lhs]
    Deref,    // *lhs
    AddrOf,   // &lhs, lhs is Var or Index
    Call,     // name(args...)
    Unary,    // unary_op lhs
    Binary,   // lhs binary_op rhs
  };

  Kind kind = Kind::IntLit;
  SourcePos pos;
  std::int32_t value = 0;
  std::string name;
  BinaryOp binary_op = BinaryOp::Add;
  UnaryOp unary_op = UnaryOp::Neg;
  ExprPtr lhs;
  ExprPtr rhs;
  std::vector<ExprPtr> args;
};

enum class VarKind { Int, Array, Pointer };

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  enum class Kind {
    Decl,      // decl_kind name [array_length] [= value]
    Assign,    // target = value
    ExprStmt,  // value;
    If,        // if (value) body [else else_body]
    While,     // while (value) body
    Return,    // return value;
    Block,     // { stmts }
  };

  Kind kind = Kind::Block;
  SourcePos pos;
  VarKind decl_kind = VarKind::Int;
  std::string name;
  std::int32_t array_length = 0;
  ExprPtr target;
  ExprPtr value;
  StmtPtr body;
  StmtPtr else_body;
  std::vector<StmtPtr> stmts;
};

struct Param {
  std::string name;
  bool is_pointer = false;
  SourcePos pos;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  StmtPtr body;
  SourcePos pos;
};

struct Program {
  std::vector<Function> functions;

  const Function* find(const std::string& name) const;
};

}  // namespace gandalf::minig
