#include "gandalf/minig/parser.hpp"

#include <cctype>
#include <cstdint>
#include <vector>

namespace gandalf::minig {

SyntaxError::SyntaxError(SourcePos pos, const std::string& message)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
      pos_(pos),
      message_(message) {}

const char* to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::And: return "&";
    case BinaryOp::Or: return "|";
    case BinaryOp::Shl: return "<<";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
  }
  return "?";
}

const Function* Program::find(const std::string& name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

enum class Tok { Ident, Number, Punct, Keyword, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::uint32_t number = 0;
  SourcePos pos;
};

bool is_keyword(const std::string& s) {
  return s == "int" || s == "if" || s == "else" || s == "while" || s == "return";
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      const SourcePos start{line, col};
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance();
      if (i + 1 >= src.size()) throw SyntaxError(start, "unterminated comment");
      advance(2);
      continue;
    }

    Token t;
    t.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t b = i;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) advance();
      t.text = std::string(src.substr(b, i - b));
      t.kind = is_keyword(t.text) ? Tok::Keyword : Tok::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t b = i;
      int base = 10;
      if (c == '0' && i + 1 < src.size() && (src[i + 1] == 'x' || src[i + 1] == 'X')) {
        base = 16;
        advance(2);
      }
      const std::size_t digits = i;
      while (i < src.size() && std::isalnum(static_cast<unsigned char>(src[i]))) advance();
      t.text = std::string(src.substr(b, i - b));
      const std::string body(src.substr(digits, i - digits));
      std::uint64_t v = 0;
      if (body.empty()) throw SyntaxError(t.pos, "malformed number '" + t.text + "'");
      for (char d : body) {
        int dv;
        if (std::isdigit(static_cast<unsigned char>(d))) dv = d - '0';
        else if (base == 16 && std::isxdigit(static_cast<unsigned char>(d))) dv = std::tolower(d) - 'a' + 10;
        else throw SyntaxError(t.pos, "malformed number '" + t.text + "'");
        v = v * base + dv;
        if (v > 0xFFFFFFFFull) throw SyntaxError(t.pos, "number '" + t.text + "' exceeds 32 bits");
      }
      t.kind = Tok::Number;
      t.number = static_cast<std::uint32_t>(v);
    } else {
      static const char* two[] = {"<<", "<=", ">=", "==", "!="};
      t.kind = Tok::Punct;
      for (const char* p : two) {
        if (src.substr(i, 2) == p) t.text = p;
      }
      if (t.text.empty()) {
        if (std::string_view("(){}[];,=+-*&|<>!").find(c) == std::string_view::npos) {
          throw SyntaxError(t.pos, std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program p;
    while (peek().kind != Tok::End) p.functions.push_back(function());
    return p;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(const char* text) const {
    const Token& t = peek();
    return (t.kind == Tok::Punct || t.kind == Tok::Keyword) && t.text == text;
  }
  bool accept(const char* text) {
    if (!at(text)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    const std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.pos, msg + ", found " + found);
  }
  const Token& expect(const char* text) {
    if (!at(text)) fail(std::string("expected '") + text + "'");
    return toks_[pos_++];
  }
  Token expect_ident() {
    if (peek().kind != Tok::Ident) fail("expected identifier");
    return toks_[pos_++];
  }

  Function function() {
    Function fn;
    fn.pos = expect("int").pos;
    fn.name = expect_ident().text;
    expect("(");
    if (!at(")")) {
      do {
        Param p;
        p.pos = expect("int").pos;
        p.is_pointer = accept("*");
        p.name = expect_ident().text;
        if (accept("[")) {
          expect("]");
          if (p.is_pointer) fail("pointer-to-array parameters are not supported");
          p.is_pointer = true;
        }
        fn.params.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    if (!at("{")) fail("expected function body");
    fn.body = block();
    return fn;
  }

  StmtPtr block() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::Block;
    s->pos = expect("{").pos;
    while (!at("}")) {
      if (peek().kind == Tok::End) fail("expected '}'");
      s->stmts.push_back(statement());
    }
    expect("}");
    return s;
  }

  StmtPtr statement() {
    if (at("{")) return block();
    auto s = std::make_unique<Stmt>();
    s->pos = peek().pos;
    if (accept("int")) {
      s->kind = Stmt::Kind::Decl;
      if (accept("*")) {
        s->decl_kind = VarKind::Pointer;
        s->name = expect_ident().text;
      } else {
        s->name = expect_ident().text;
        if (accept("[")) {
          s->decl_kind = VarKind::Array;
          if (peek().kind != Tok::Number) fail("expected array length");
          const Token& n = toks_[pos_++];
          if (n.number == 0 || n.number > 4096) {
            throw SyntaxError(n.pos, "array length must be between 1 and 4096");
          }
          s->array_length = static_cast<std::int32_t>(n.number);
          expect("]");
        }
      }
      if (accept("=")) {
        if (s->decl_kind == VarKind::Array) fail("array initializers are not supported");
        s->value = expr();
      }
      expect(";");
      return s;
    }
    if (accept("if")) {
      s->kind = Stmt::Kind::If;
      expect("(");
      s->value = expr();
      expect(")");
      s->body = statement();
      if (accept("else")) s->else_body = statement();
      return s;
    }
    if (accept("while")) {
      s->kind = Stmt::Kind::While;
      expect("(");
      s->value = expr();
      expect(")");
      s->body = statement();
      return s;
    }
    if (accept("return")) {
      s->kind = Stmt::Kind::Return;
      s->value = expr();
      expect(";");
      return s;
    }
    ExprPtr e = expr();
    if (at("=")) {
      const SourcePos eq = peek().pos;
      ++pos_;
      if (e->kind != Expr::Kind::Var && e->kind != Expr::Kind::Index && e->kind != Expr::Kind::Deref) {
        throw SyntaxError(eq, "left side of assignment is not assignable");
      }
      s->kind = Stmt::Kind::Assign;
      s->target = std::move(e);
      s->value = expr();
    } else {
      s->kind = Stmt::Kind::ExprStmt;
      s->value = std::move(e);
    }
    expect(";");
    return s;
  }

  static ExprPtr binary(BinaryOp op, ExprPtr l, ExprPtr r, SourcePos pos) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Binary;
    e->binary_op = op;
    e->pos = pos;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    return e;
  }

  struct OpEntry {
    const char* text;
    BinaryOp op;
  };

  template <std::size_t N>
  ExprPtr left_assoc(ExprPtr (Parser::*next)(), const OpEntry (&ops)[N]) {
    ExprPtr lhs = (this->*next)();
    for (;;) {
      const OpEntry* hit = nullptr;
      for (const auto& o : ops) {
        if (at(o.text)) hit = &o;
      }
      if (!hit) return lhs;
      const SourcePos pos = peek().pos;
      ++pos_;
      lhs = binary(hit->op, std::move(lhs), (this->*next)(), pos);
    }
  }

  ExprPtr expr() { return or_expr(); }
  ExprPtr or_expr() {
    static const OpEntry ops[] = {{"|", BinaryOp::Or}};
    return left_assoc(&Parser::and_expr, ops);
  }
  ExprPtr and_expr() {
    static const OpEntry ops[] = {{"&", BinaryOp::And}};
    return left_assoc(&Parser::equality, ops);
  }
  ExprPtr equality() {
    static const OpEntry ops[] = {{"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}};
    return left_assoc(&Parser::relational, ops);
  }
  ExprPtr relational() {
    static const OpEntry ops[] = {
        {"<", BinaryOp::Lt}, {">", BinaryOp::Gt}, {"<=", BinaryOp::Le}, {">=", BinaryOp::Ge}};
    return left_assoc(&Parser::shift, ops);
  }
  ExprPtr shift() {
    static const OpEntry ops[] = {{"<<", BinaryOp::Shl}};
    return left_assoc(&Parser::additive, ops);
  }
  ExprPtr additive() {
    static const OpEntry ops[] = {{"+", BinaryOp::Add}, {"-", BinaryOp::Sub}};
    return left_assoc(&Parser::multiplicative, ops);
  }
  ExprPtr multiplicative() {
    static const OpEntry ops[] = {{"*", BinaryOp::Mul}};
    return left_assoc(&Parser::unary, ops);
  }

  ExprPtr unary() {
    const SourcePos pos = peek().pos;
    auto make = [&](Expr::Kind kind) {
      auto e = std::make_unique<Expr>();
      e->kind = kind;
      e->pos = pos;
      return e;
    };
    if (accept("-")) {
      auto e = make(Expr::Kind::Unary);
      e->unary_op = UnaryOp::Neg;
      e->lhs = unary();
      return e;
    }
    if (accept("!")) {
      auto e = make(Expr::Kind::Unary);
      e->unary_op = UnaryOp::Not;
      e->lhs = unary();
      return e;
    }
    if (accept("*")) {
      auto e = make(Expr::Kind::Deref);
      e->lhs = unary();
      return e;
    }
    if (accept("&")) {
      auto e = make(Expr::Kind::AddrOf);
      e->lhs = unary();
      if (e->lhs->kind != Expr::Kind::Var && e->lhs->kind != Expr::Kind::Index) {
        throw SyntaxError(pos, "operand of '&' must be a variable or an indexed element");
      }
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = peek();
    auto e = std::make_unique<Expr>();
    e->pos = t.pos;
    if (t.kind == Tok::Number) {
      e->kind = Expr::Kind::IntLit;
      e->value = static_cast<std::int32_t>(t.number);
      ++pos_;
      return e;
    }
    if (t.kind == Tok::Ident) {
      e->name = t.text;
      ++pos_;
      if (accept("(")) {
        e->kind = Expr::Kind::Call;
        if (!at(")")) {
          do {
            e->args.push_back(expr());
          } while (accept(","));
        }
        expect(")");
      } else if (accept("[")) {
        e->kind = Expr::Kind::Index;
        e->lhs = expr();
        expect("]");
      } else {
        e->kind = Expr::Kind::Var;
      }
      return e;
    }
    if (accept("(")) {
      ExprPtr inner = expr();
      expect(")");
      return inner;
    }
    fail("expected expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Program parse(std::string_view source) {
  Parser p(lex(source));
  return p.program();
}

}  // namespace gandalf::minig
