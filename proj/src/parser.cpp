#include "gemini/parser.hpp"

#include <fmt/format.h>

#include <unordered_set>

namespace gemini {

namespace {

struct OpRow {
  TokenKind token;
  BinOp op;
  int prec;        // higher binds tighter
  bool right;
};

// The operator table, bottom row = loosest. Rows follow the published order
// of precedence with the top row binding tightest.
const OpRow kOps[] = {
    {TokenKind::Assign, BinOp::Assign, 1, true},
    {TokenKind::KwOrelse, BinOp::Orelse, 2, false},
    {TokenKind::KwAndalso, BinOp::Andalso, 3, false},
    {TokenKind::Shl, BinOp::Shl, 4, false},
    {TokenKind::Shr, BinOp::Shr, 4, false},
    {TokenKind::Sar, BinOp::Sar, 4, false},
    {TokenKind::Eq, BinOp::Eq, 5, false},
    {TokenKind::NotEq, BinOp::NotEq, 5, false},
    {TokenKind::Lt, BinOp::Lt, 6, false},
    {TokenKind::Gt, BinOp::Gt, 6, false},
    {TokenKind::Le, BinOp::Le, 6, false},
    {TokenKind::Ge, BinOp::Ge, 6, false},
    {TokenKind::ColonColon, BinOp::Cons, 7, true},
    {TokenKind::PipePipe, BinOp::LogOr, 8, false},
    {TokenKind::CaretCaret, BinOp::LogXor, 8, false},
    {TokenKind::AmpAmp, BinOp::LogAnd, 9, false},
    {TokenKind::Plus, BinOp::Add, 10, false},
    {TokenKind::Minus, BinOp::Sub, 10, false},
    {TokenKind::PlusDot, BinOp::RAdd, 10, false},
    {TokenKind::MinusDot, BinOp::RSub, 10, false},
    {TokenKind::Caret, BinOp::Xor, 10, false},
    {TokenKind::Pipe, BinOp::Or, 10, false},
    {TokenKind::Star, BinOp::Mul, 11, false},
    {TokenKind::Slash, BinOp::Div, 11, false},
    {TokenKind::StarDot, BinOp::RMul, 11, false},
    {TokenKind::SlashDot, BinOp::RDiv, 11, false},
    {TokenKind::Amp, BinOp::And, 11, false},
    {TokenKind::Percent, BinOp::Mod, 11, false},
};

const OpRow* find_op(TokenKind kind) {
  for (const auto& row : kOps)
    if (row.token == kind) return &row;
  return nullptr;
}

struct ParseError {};

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, DiagnosticSink& diags)
      : tokens_(tokens), diags_(diags) {}

  ExprPtr program() {
    ExprPtr e = expression();
    expect(TokenKind::Eof, "end of input");
    return e;
  }

  ExprPtr expression() { return parse_exp(); }

 private:
  const std::vector<Token>& tokens_;
  DiagnosticSink& diags_;
  size_t pos_ = 0;

  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  bool at(TokenKind kind) const { return peek().kind == kind; }
  const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
  bool accept(TokenKind kind) {
    if (!at(kind)) return false;
    advance();
    return true;
  }
  const Token& expect(TokenKind kind, const char* what) {
    if (!at(kind)) {
      diags_.error(Code::UnexpectedToken, peek().span,
                   fmt::format("expected {} but found '{}'", what,
                               peek().kind == TokenKind::Eof ? "end of input"
                                                             : peek().text));
      throw ParseError{};
    }
    return advance();
  }

  Span merge(Span a, Span b) const {
    Span s = a;
    s.end = std::max(a.end, b.end);
    return s;
  }
  Span spanned_from(Span start) const {
    Span s = start;
    if (pos_ > 0) s.end = std::max(s.end, tokens_[pos_ - 1].span.end);
    return s;
  }

  // ---- expressions ---------------------------------------------------------

  ExprPtr parse_exp() { return parse_binary(1); }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    for (;;) {
      const OpRow* row = find_op(peek().kind);
      if (!row || row->prec < min_prec) break;
      advance();
      ExprPtr rhs = parse_binary(row->right ? row->prec : row->prec + 1);
      auto e = Expr::make(Expr::Kind::Binary, merge(lhs->span, rhs->span));
      e->binop = row->op;
      e->items.push_back(std::move(lhs));
      e->items.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    Span start = peek().span;
    auto unary = [&](UnOp op) {
      advance();
      ExprPtr operand = parse_unary();
      auto e = Expr::make(Expr::Kind::Unary, spanned_from(start));
      e->unop = op;
      e->items.push_back(std::move(operand));
      return e;
    };
    switch (peek().kind) {
      case TokenKind::KwIf: return parse_if();
      case TokenKind::KwCase: return parse_case();
      case TokenKind::Tilde: return unary(UnOp::IntNeg);
      case TokenKind::Bang: return unary(UnOp::BitNot);
      case TokenKind::AmpArrow: return unary(UnOp::AndReduce);
      case TokenKind::PipeArrow: return unary(UnOp::OrReduce);
      case TokenKind::CaretArrow: return unary(UnOp::XorReduce);
      case TokenKind::KwNot: return unary(UnOp::LogNot);
      case TokenKind::KwSw: {
        advance();
        ExprPtr operand = parse_unary();
        auto e = Expr::make(Expr::Kind::SwWrap, spanned_from(start));
        e->items.push_back(std::move(operand));
        return e;
      }
      case TokenKind::KwUnsw: {
        advance();
        ExprPtr operand = parse_unary();
        auto e = Expr::make(Expr::Kind::UnswWrap, spanned_from(start));
        e->items.push_back(std::move(operand));
        return e;
      }
      case TokenKind::KwRef: {
        advance();
        ExprPtr operand = parse_unary();
        auto e = Expr::make(Expr::Kind::RefLit, spanned_from(start));
        e->items.push_back(std::move(operand));
        return e;
      }
      default:
        return parse_app();
    }
  }

  bool starts_access() const {
    switch (peek().kind) {
      case TokenKind::Dollar:
      case TokenKind::Hash:
      case TokenKind::IntLit:
      case TokenKind::RealLit:
      case TokenKind::StringLit:
      case TokenKind::BitLit:
      case TokenKind::Ident:
      case TokenKind::KwNil:
      case TokenKind::LParen:
      case TokenKind::LBrack:
      case TokenKind::LBrace:
      case TokenKind::HashParen:
      case TokenKind::HashBrack:
      case TokenKind::HashBrace:
      case TokenKind::KwLet:
        return true;
      default:
        return false;
    }
  }

  ExprPtr parse_app() {
    Span start = peek().span;
    ExprPtr e = parse_access();
    for (;;) {
      if (at(TokenKind::LtColon)) {
        advance();
        ExprPtr size = parse_exp();
        expect(TokenKind::ColonGt, "':>' closing the size argument");
        auto p = Expr::make(Expr::Kind::Parameterize, spanned_from(start));
        p->items.push_back(std::move(e));
        p->items.push_back(std::move(size));
        e = std::move(p);
        continue;
      }
      if (at(TokenKind::BitsSigned) || at(TokenKind::BitsUnsigned) ||
          at(TokenKind::BitsRepl)) {
        char mode = at(TokenKind::BitsSigned) ? 's'
                    : at(TokenKind::BitsUnsigned) ? 'u' : 'r';
        advance();
        ExprPtr value = parse_access();
        auto b = Expr::make(Expr::Kind::BitArrayBuild, spanned_from(start));
        b->bits_mode = mode;
        b->items.push_back(std::move(e));
        b->items.push_back(std::move(value));
        e = std::move(b);
        continue;
      }
      if (!starts_access()) break;
      ExprPtr arg = parse_access();
      auto app = Expr::make(Expr::Kind::App, spanned_from(start));
      app->items.push_back(std::move(e));
      app->items.push_back(std::move(arg));
      e = std::move(app);
    }
    return e;
  }

  // Prefix accesses ($, #label) wrap a postfix-indexed atom; index access
  // sits outside the prefix chain, matching the published precedence rows.
  ExprPtr parse_access() {
    Span start = peek().span;
    ExprPtr e = parse_prefix_access();
    while (at(TokenKind::LBrackColon)) {
      advance();
      ExprPtr index = parse_exp();
      expect(TokenKind::ColonRBrack, "':]' closing the index");
      auto acc = Expr::make(Expr::Kind::ArrayAccess, spanned_from(start));
      acc->items.push_back(std::move(e));
      acc->items.push_back(std::move(index));
      e = std::move(acc);
    }
    return e;
  }

  ExprPtr parse_prefix_access() {
    Span start = peek().span;
    if (at(TokenKind::Dollar)) {
      advance();
      ExprPtr operand = parse_prefix_access();
      auto e = Expr::make(Expr::Kind::Unary, spanned_from(start));
      e->unop = UnOp::Deref;
      e->items.push_back(std::move(operand));
      return e;
    }
    if (at(TokenKind::Hash)) {
      advance();
      std::string label;
      if (at(TokenKind::Ident)) label = advance().str_value;
      else if (at(TokenKind::IntLit)) label = std::to_string(advance().int_value);
      else {
        diags_.error(Code::UnexpectedToken, peek().span,
                     "expected a field label after '#'");
        throw ParseError{};
      }
      ExprPtr operand = parse_prefix_access();
      auto e = Expr::make(Expr::Kind::FieldAccess, spanned_from(start));
      e->str_value = label;
      e->items.push_back(std::move(operand));
      return e;
    }
    return parse_atom();
  }

  ExprPtr parse_atom() {
    Span start = peek().span;
    switch (peek().kind) {
      case TokenKind::IntLit: {
        auto e = Expr::make(Expr::Kind::IntLit, start);
        e->int_value = advance().int_value;
        return e;
      }
      case TokenKind::RealLit: {
        auto e = Expr::make(Expr::Kind::RealLit, start);
        e->real_value = advance().real_value;
        return e;
      }
      case TokenKind::StringLit: {
        auto e = Expr::make(Expr::Kind::StringLit, start);
        e->str_value = advance().str_value;
        return e;
      }
      case TokenKind::BitLit: {
        auto e = Expr::make(Expr::Kind::BitLit, start);
        e->int_value = advance().int_value;
        return e;
      }
      case TokenKind::Ident: {
        std::string name = advance().str_value;
        if (at(TokenKind::Dot) && peek(1).kind == TokenKind::Ident) {
          advance();
          name += "." + advance().str_value;
        }
        auto e = Expr::make(Expr::Kind::Var, spanned_from(start));
        e->str_value = name;
        return e;
      }
      case TokenKind::KwNil: {
        advance();
        return Expr::make(Expr::Kind::ListLit, start);
      }
      case TokenKind::KwLet: return parse_let();
      case TokenKind::LParen: return parse_paren();
      case TokenKind::LBrack: {
        advance();
        auto e = Expr::make(Expr::Kind::ListLit, start);
        if (!at(TokenKind::RBrack)) {
          do {
            e->items.push_back(parse_exp());
          } while (accept(TokenKind::Comma));
        }
        expect(TokenKind::RBrack, "']' closing the list");
        e->span = spanned_from(start);
        return e;
      }
      case TokenKind::LBrace: return parse_record(false);
      case TokenKind::HashBrace: return parse_record(true);
      case TokenKind::HashBrack: return parse_hash_bracket();
      case TokenKind::HashParen: {
        advance();
        std::vector<ExprPtr> items;
        if (!at(TokenKind::RParen)) {
          do {
            items.push_back(parse_exp());
          } while (accept(TokenKind::Comma));
        }
        expect(TokenKind::RParen, "')' closing the hardware tuple");
        if (items.size() == 1) return std::move(items[0]);
        auto e = Expr::make(Expr::Kind::HwTupleLit, spanned_from(start));
        e->items = std::move(items);
        return e;
      }
      default:
        diags_.error(Code::UnexpectedToken, peek().span,
                     fmt::format("expected an expression but found '{}'",
                                 peek().kind == TokenKind::Eof ? "end of input"
                                                               : peek().text));
        throw ParseError{};
    }
  }

  ExprPtr parse_paren() {
    Span start = peek().span;
    advance();  // (
    if (accept(TokenKind::RParen)) return Expr::make(Expr::Kind::UnitLit, spanned_from(start));
    ExprPtr first = parse_exp();
    if (at(TokenKind::Comma)) {
      auto e = Expr::make(Expr::Kind::TupleLit, start);
      e->items.push_back(std::move(first));
      while (accept(TokenKind::Comma)) e->items.push_back(parse_exp());
      expect(TokenKind::RParen, "')' closing the tuple");
      e->span = spanned_from(start);
      return e;
    }
    if (at(TokenKind::Semi)) {
      auto e = Expr::make(Expr::Kind::Seq, start);
      e->items.push_back(std::move(first));
      while (accept(TokenKind::Semi)) e->items.push_back(parse_exp());
      expect(TokenKind::RParen, "')' closing the sequence");
      e->span = spanned_from(start);
      return e;
    }
    expect(TokenKind::RParen, "')'");
    return first;
  }

  ExprPtr parse_record(bool hardware) {
    Span start = peek().span;
    advance();  // { or #{
    auto e = Expr::make(Expr::Kind::RecordLit, start);
    e->hardware = hardware;
    std::unordered_set<std::string> seen;
    if (!at(TokenKind::RBrace)) {
      do {
        const Token& label = expect(TokenKind::Ident, "a record field label");
        if (!seen.insert(label.str_value).second) {
          diags_.error(Code::DuplicateLabel, label.span,
                       fmt::format("duplicate record label '{}'", label.str_value));
        }
        expect(TokenKind::Eq, "'=' after the field label");
        e->fields.emplace_back(label.str_value, parse_exp());
      } while (accept(TokenKind::Comma));
    }
    expect(TokenKind::RBrace, "'}' closing the record");
    e->span = spanned_from(start);
    return e;
  }

  // #[e, ...] literal or #[size; gen i => body] generation.
  ExprPtr parse_hash_bracket() {
    Span start = peek().span;
    advance();  // #[
    if (at(TokenKind::RBrack)) {
      advance();
      return Expr::make(Expr::Kind::ArrayLit, spanned_from(start));
    }
    ExprPtr first = parse_exp();
    if (accept(TokenKind::Semi)) {
      expect(TokenKind::KwGen, "'gen' in the array generation form");
      const Token& binder = expect(TokenKind::Ident, "the generator index name");
      expect(TokenKind::DArrow, "'=>' before the generator body");
      ExprPtr body = parse_exp();
      expect(TokenKind::RBrack, "']' closing the array generation");
      auto e = Expr::make(Expr::Kind::ArrayGen, spanned_from(start));
      e->str_value = binder.str_value;
      e->items.push_back(std::move(first));
      e->items.push_back(std::move(body));
      return e;
    }
    auto e = Expr::make(Expr::Kind::ArrayLit, start);
    e->items.push_back(std::move(first));
    while (accept(TokenKind::Comma)) e->items.push_back(parse_exp());
    expect(TokenKind::RBrack, "']' closing the array literal");
    e->span = spanned_from(start);
    return e;
  }

  ExprPtr parse_if() {
    Span start = peek().span;
    advance();  // if
    ExprPtr guard = parse_exp();
    expect(TokenKind::KwThen, "'then'");
    ExprPtr then_branch = parse_exp();
    auto e = Expr::make(Expr::Kind::If, start);
    e->items.push_back(std::move(guard));
    e->items.push_back(std::move(then_branch));
    if (accept(TokenKind::KwElse)) e->items.push_back(parse_exp());
    e->span = spanned_from(start);
    return e;
  }

  ExprPtr parse_case() {
    Span start = peek().span;
    advance();  // case
    ExprPtr scrutinee = parse_exp();
    expect(TokenKind::KwOf, "'of'");
    auto e = Expr::make(Expr::Kind::Case, start);
    e->items.push_back(std::move(scrutinee));
    do {
      PatternPtr pat = parse_pattern();
      expect(TokenKind::DArrow, "'=>' after the pattern");
      ExprPtr body = parse_exp();
      e->arms.emplace_back(std::move(pat), std::move(body));
    } while (accept(TokenKind::BarColon));
    e->span = spanned_from(start);
    return e;
  }

  ExprPtr parse_let() {
    Span start = peek().span;
    advance();  // let
    auto e = Expr::make(Expr::Kind::Let, start);
    while (!at(TokenKind::KwIn)) e->decs.push_back(parse_dec());
    expect(TokenKind::KwIn, "'in'");
    e->items.push_back(parse_exp());
    expect(TokenKind::KwEnd, "'end' closing the let");
    e->span = spanned_from(start);
    return e;
  }

  // ---- declarations --------------------------------------------------------

  Dec parse_dec() {
    Span start = peek().span;
    switch (peek().kind) {
      case TokenKind::KwVal: {
        advance();
        Dec d;
        d.kind = Dec::Kind::Val;
        d.name = expect(TokenKind::Ident, "the value name").str_value;
        if (accept(TokenKind::Colon)) d.annotation = parse_ty();
        expect(TokenKind::Eq, "'='");
        d.rhs = parse_exp();
        d.span = spanned_from(start);
        return d;
      }
      case TokenKind::KwFun: {
        advance();
        Dec d;
        d.kind = Dec::Kind::Fun;
        d.name = expect(TokenKind::Ident, "the function name").str_value;
        while (at(TokenKind::Ident) || at(TokenKind::LParen) || at(TokenKind::LBrace))
          d.groups.push_back(parse_param_group(false));
        if (d.groups.empty()) {
          diags_.error(Code::UnexpectedToken, peek().span,
                       "a function declaration needs at least one parameter");
          throw ParseError{};
        }
        if (accept(TokenKind::Colon)) d.annotation = parse_ty();
        expect(TokenKind::Eq, "'='");
        d.body = parse_exp();
        d.span = spanned_from(start);
        return d;
      }
      case TokenKind::KwType: {
        advance();
        Dec d;
        d.kind = Dec::Kind::Type;
        d.tyvars = parse_tyvars();
        d.name = expect(TokenKind::Ident, "the type name").str_value;
        expect(TokenKind::Eq, "'='");
        d.ty_rhs = parse_ty();
        d.span = spanned_from(start);
        return d;
      }
      case TokenKind::KwSdatatype:
      case TokenKind::KwHdatatype: {
        bool hardware = peek().kind == TokenKind::KwHdatatype;
        advance();
        Dec d;
        d.kind = Dec::Kind::Datatype;
        d.hardware = hardware;
        d.tyvars = parse_tyvars();
        d.name = expect(TokenKind::Ident, "the datatype name").str_value;
        expect(TokenKind::Eq, "'='");
        do {
          Ctor c;
          c.span = peek().span;
          c.name = expect(TokenKind::Ident, "a constructor name").str_value;
          if (accept(TokenKind::KwOf)) c.payload = parse_ty();
          d.ctors.push_back(std::move(c));
        } while (accept(TokenKind::BarColon));
        d.span = spanned_from(start);
        return d;
      }
      case TokenKind::KwModule: {
        advance();
        Dec d;
        d.kind = Dec::Kind::Module;
        d.name = expect(TokenKind::Ident, "the module name").str_value;
        if (accept(TokenKind::LtColon)) {
          d.size_param = expect(TokenKind::Ident, "the size parameter name").str_value;
          expect(TokenKind::ColonGt, "':>' closing the size parameter");
        }
        d.groups.push_back(parse_param_group(true));
        if (accept(TokenKind::Colon)) d.annotation = parse_ty();
        expect(TokenKind::Eq, "'='");
        d.body = parse_exp();
        d.span = spanned_from(start);
        return d;
      }
      default:
        diags_.error(Code::UnexpectedToken, peek().span,
                     fmt::format("expected a declaration but found '{}'", peek().text));
        throw ParseError{};
    }
  }

  std::vector<std::string> parse_tyvars() {
    std::vector<std::string> vars;
    if (at(TokenKind::TyVar)) {
      vars.push_back(advance().str_value);
    } else if (at(TokenKind::LParen) && peek(1).kind == TokenKind::TyVar) {
      advance();
      do {
        vars.push_back(expect(TokenKind::TyVar, "a type variable").str_value);
      } while (accept(TokenKind::Comma));
      expect(TokenKind::RParen, "')' closing the type variables");
    }
    return vars;
  }

  ParamGroup parse_param_group(bool module) {
    ParamGroup g;
    g.span = peek().span;
    TokenKind open = peek().kind;
    if (at(TokenKind::Ident)) {
      g.kind = ParamGroup::Kind::Single;
      g.params.emplace_back(advance().str_value, nullptr);
      return g;
    }
    if ((module && (open == TokenKind::HashParen || open == TokenKind::HashBrace)) ||
        (!module && (open == TokenKind::LParen || open == TokenKind::LBrace))) {
      bool record = open == TokenKind::LBrace || open == TokenKind::HashBrace;
      TokenKind close = record ? TokenKind::RBrace : TokenKind::RParen;
      advance();
      g.kind = record ? ParamGroup::Kind::Record : ParamGroup::Kind::Tuple;
      do {
        std::string name = expect(TokenKind::Ident, "a parameter name").str_value;
        AstTyPtr ty;
        if (accept(TokenKind::Colon)) ty = parse_ty();
        g.params.emplace_back(std::move(name), std::move(ty));
      } while (accept(TokenKind::Comma));
      expect(close, record ? "'}' closing the parameter group"
                           : "')' closing the parameter group");
      if (!record && g.params.size() == 1) g.kind = ParamGroup::Kind::Single;
      return g;
    }
    diags_.error(Code::UnexpectedToken, peek().span,
                 fmt::format("expected a parameter group but found '{}'", peek().text));
    throw ParseError{};
  }

  // ---- patterns -------------------------------------------------------------

  PatternPtr parse_pattern() {
    PatternPtr lhs = parse_pattern_atom();
    if (at(TokenKind::ColonColon)) {
      advance();
      PatternPtr rhs = parse_pattern();  // :: is right-associative
      auto p = std::make_unique<Pattern>();
      p->kind = Pattern::Kind::Cons;
      p->span = merge(lhs->span, rhs->span);
      p->items.push_back(std::move(lhs));
      p->items.push_back(std::move(rhs));
      return p;
    }
    return lhs;
  }

  bool starts_pattern_atom() const {
    switch (peek().kind) {
      case TokenKind::IntLit:
      case TokenKind::RealLit:
      case TokenKind::StringLit:
      case TokenKind::Ident:
      case TokenKind::KwNil:
      case TokenKind::LParen:
      case TokenKind::LBrack:
      case TokenKind::LBrace:
        return true;
      default:
        return false;
    }
  }

  PatternPtr parse_pattern_atom() {
    Span start = peek().span;
    auto p = std::make_unique<Pattern>();
    p->span = start;
    switch (peek().kind) {
      case TokenKind::IntLit:
        p->kind = Pattern::Kind::Int;
        p->int_value = advance().int_value;
        return p;
      case TokenKind::RealLit:
        p->kind = Pattern::Kind::Real;
        p->real_value = advance().real_value;
        return p;
      case TokenKind::StringLit:
        p->kind = Pattern::Kind::String;
        p->str_value = advance().str_value;
        return p;
      case TokenKind::Ident: {
        p->str_value = advance().str_value;
        // Constructor application: an identifier directly followed by a
        // pattern atom. Whether a bare identifier is a nullary constructor
        // is resolved during semantic analysis.
        if (starts_pattern_atom()) {
          p->kind = Pattern::Kind::Ctor;
          p->items.push_back(parse_pattern_atom());
        } else {
          p->kind = Pattern::Kind::Var;
        }
        p->span = spanned_from(start);
        return p;
      }
      case TokenKind::KwNil:
        advance();
        p->kind = Pattern::Kind::List;
        return p;
      case TokenKind::LBrack: {
        advance();
        p->kind = Pattern::Kind::List;
        if (!at(TokenKind::RBrack)) {
          do {
            p->items.push_back(parse_pattern());
          } while (accept(TokenKind::Comma));
        }
        expect(TokenKind::RBrack, "']' closing the list pattern");
        p->span = spanned_from(start);
        return p;
      }
      case TokenKind::LParen: {
        advance();
        std::vector<PatternPtr> items;
        if (!at(TokenKind::RParen)) {
          do {
            items.push_back(parse_pattern());
          } while (accept(TokenKind::Comma));
        }
        expect(TokenKind::RParen, "')' closing the pattern");
        if (items.size() == 1) return std::move(items[0]);
        p->kind = Pattern::Kind::Tuple;
        p->items = std::move(items);
        p->span = spanned_from(start);
        return p;
      }
      case TokenKind::LBrace: {
        advance();
        p->kind = Pattern::Kind::Record;
        std::unordered_set<std::string> seen;
        if (!at(TokenKind::RBrace)) {
          do {
            const Token& label = expect(TokenKind::Ident, "a record field label");
            if (!seen.insert(label.str_value).second) {
              diags_.error(Code::DuplicateLabel, label.span,
                           fmt::format("duplicate record label '{}'", label.str_value));
            }
            expect(TokenKind::Eq, "'=' after the field label");
            p->fields.emplace_back(label.str_value, parse_pattern());
          } while (accept(TokenKind::Comma));
        }
        expect(TokenKind::RBrace, "'}' closing the record pattern");
        p->span = spanned_from(start);
        return p;
      }
      default:
        diags_.error(Code::UnexpectedToken, peek().span,
                     fmt::format("expected a pattern but found '{}'", peek().text));
        throw ParseError{};
    }
  }

  // ---- types ----------------------------------------------------------------

  AstTyPtr parse_ty() { return parse_fun_ty(); }

  AstTyPtr parse_fun_ty() {
    AstTyPtr lhs = parse_tuple_ty();
    if (accept(TokenKind::Arrow)) {
      AstTyPtr rhs = parse_fun_ty();
      auto t = std::make_unique<AstTy>();
      t->kind = AstTy::Kind::Fun;
      t->span = merge(lhs->span, rhs->span);
      t->args.push_back(std::move(lhs));
      t->args.push_back(std::move(rhs));
      return t;
    }
    return lhs;
  }

  AstTyPtr parse_tuple_ty() {
    AstTyPtr first = parse_postfix_ty();
    if (!at(TokenKind::Star) && !at(TokenKind::HashStar)) return first;
    bool hardware = at(TokenKind::HashStar);
    auto t = std::make_unique<AstTy>();
    t->kind = hardware ? AstTy::Kind::HwTuple : AstTy::Kind::Tuple;
    t->span = first->span;
    t->args.push_back(std::move(first));
    while (accept(hardware ? TokenKind::HashStar : TokenKind::Star))
      t->args.push_back(parse_postfix_ty());
    t->span = spanned_from(t->span);
    return t;
  }

  AstTyPtr parse_postfix_ty() {
    Span start = peek().span;
    AstTyPtr t = parse_ty_atom();
    for (;;) {
      if (at(TokenKind::Ident)) {
        const std::string& name = peek().str_value;
        AstTy::Kind kind;
        if (name == "list") kind = AstTy::Kind::List;
        else kind = AstTy::Kind::Apply;
        advance();
        auto wrap = std::make_unique<AstTy>();
        wrap->kind = kind;
        wrap->span = spanned_from(start);
        if (kind == AstTy::Kind::Apply) wrap->name = name;
        wrap->args.push_back(std::move(t));
        t = std::move(wrap);
        continue;
      }
      if (at(TokenKind::KwRef) || at(TokenKind::KwSw)) {
        AstTy::Kind kind = at(TokenKind::KwRef) ? AstTy::Kind::Ref : AstTy::Kind::Sw;
        advance();
        auto wrap = std::make_unique<AstTy>();
        wrap->kind = kind;
        wrap->span = spanned_from(start);
        wrap->args.push_back(std::move(t));
        t = std::move(wrap);
        continue;
      }
      if (at(TokenKind::LBrack)) {
        advance();
        auto wrap = std::make_unique<AstTy>();
        wrap->kind = AstTy::Kind::Array;
        wrap->size = parse_exp();
        expect(TokenKind::RBrack, "']' closing the array size");
        wrap->span = spanned_from(start);
        wrap->args.push_back(std::move(t));
        t = std::move(wrap);
        continue;
      }
      if (at(TokenKind::At)) {
        advance();
        auto wrap = std::make_unique<AstTy>();
        wrap->kind = AstTy::Kind::Temporal;
        wrap->size = parse_app();
        wrap->span = spanned_from(start);
        wrap->args.push_back(std::move(t));
        t = std::move(wrap);
        continue;
      }
      break;
    }
    return t;
  }

  AstTyPtr parse_ty_atom() {
    Span start = peek().span;
    auto t = std::make_unique<AstTy>();
    t->span = start;
    switch (peek().kind) {
      case TokenKind::Ident:
        t->kind = AstTy::Kind::Name;
        t->name = advance().str_value;
        return t;
      case TokenKind::TyVar:
        t->kind = AstTy::Kind::Var;
        t->name = advance().str_value;
        return t;
      case TokenKind::LParen: {
        advance();
        AstTyPtr inner = parse_ty();
        expect(TokenKind::RParen, "')' closing the type");
        return inner;
      }
      case TokenKind::LBrace:
      case TokenKind::HashBrace: {
        bool hardware = peek().kind == TokenKind::HashBrace;
        advance();
        t->kind = hardware ? AstTy::Kind::HwRecord : AstTy::Kind::SwRecord;
        std::unordered_set<std::string> seen;
        if (!at(TokenKind::RBrace)) {
          do {
            const Token& label = expect(TokenKind::Ident, "a field label");
            if (!seen.insert(label.str_value).second) {
              diags_.error(Code::DuplicateLabel, label.span,
                           fmt::format("duplicate record label '{}'", label.str_value));
            }
            expect(TokenKind::Colon, "':' after the field label");
            t->fields.emplace_back(label.str_value, parse_ty());
          } while (accept(TokenKind::Comma));
        }
        expect(TokenKind::RBrace, "'}' closing the record type");
        t->span = spanned_from(start);
        return t;
      }
      default:
        diags_.error(Code::UnexpectedToken, peek().span,
                     fmt::format("expected a type but found '{}'", peek().text));
        throw ParseError{};
    }
  }
};

}  // namespace

ExprPtr parse_program(const std::vector<Token>& tokens, DiagnosticSink& diags) {
  Parser parser(tokens, diags);
  try {
    return parser.program();
  } catch (ParseError&) {
    return nullptr;
  }
}

ExprPtr parse_expression(const std::vector<Token>& tokens, DiagnosticSink& diags) {
  Parser parser(tokens, diags);
  try {
    return parser.expression();
  } catch (ParseError&) {
    return nullptr;
  }
}

// ---------------------------------------------------------------------------
// Desugaring of derived terms
// ---------------------------------------------------------------------------

namespace {

ExprPtr int_lit(Span span, int64_t v) {
  auto e = Expr::make(Expr::Kind::IntLit, span);
  e->int_value = v;
  return e;
}

ExprPtr empty_record(Span span, bool hardware = false) {
  auto e = Expr::make(Expr::Kind::RecordLit, span);
  e->hardware = hardware;
  return e;
}

void desugar_dec(Dec& d);
void desugar_inplace(ExprPtr& e);

void desugar_children(Expr& e) {
  for (auto& item : e.items) desugar_inplace(item);
  for (auto& [label, sub] : e.fields) desugar_inplace(sub);
  for (auto& d : e.decs) desugar_dec(d);
  for (auto& [pat, body] : e.arms) desugar_inplace(body);
}

void desugar_dec(Dec& d) {
  if (d.rhs) desugar_inplace(d.rhs);
  if (d.body) desugar_inplace(d.body);
  if (d.annotation && d.annotation->size) desugar_inplace(d.annotation->size);
}

void desugar_inplace(ExprPtr& e) {
  desugar_children(*e);
  switch (e->kind) {
    case Expr::Kind::TupleLit:
    case Expr::Kind::HwTupleLit: {
      auto rec = Expr::make(Expr::Kind::RecordLit, e->span);
      rec->hardware = e->kind == Expr::Kind::HwTupleLit;
      for (size_t i = 0; i < e->items.size(); ++i)
        rec->fields.emplace_back(std::to_string(i + 1), std::move(e->items[i]));
      rec->sem_type = e->sem_type;
      e = std::move(rec);
      return;
    }
    case Expr::Kind::UnitLit:
      e = empty_record(e->span);
      return;
    case Expr::Kind::If:
      if (e->items.size() == 2) e->items.push_back(empty_record(e->span));
      return;
    case Expr::Kind::Unary:
      if (e->unop == UnOp::LogNot) {
        // not e == if e then 0 else 1
        auto cond = Expr::make(Expr::Kind::If, e->span);
        cond->items.push_back(std::move(e->items[0]));
        cond->items.push_back(int_lit(e->span, 0));
        cond->items.push_back(int_lit(e->span, 1));
        e = std::move(cond);
        return;
      }
      // Reductions over array literals expand to chained gates; a singleton
      // reduces to its only element.
      if ((e->unop == UnOp::AndReduce || e->unop == UnOp::OrReduce ||
           e->unop == UnOp::XorReduce) &&
          e->items[0]->kind == Expr::Kind::ArrayLit &&
          !e->items[0]->items.empty()) {
        BinOp op = e->unop == UnOp::AndReduce ? BinOp::And
                   : e->unop == UnOp::OrReduce ? BinOp::Or : BinOp::Xor;
        auto& elems = e->items[0]->items;
        ExprPtr acc = std::move(elems[0]);
        for (size_t i = 1; i < elems.size(); ++i) {
          auto bin = Expr::make(Expr::Kind::Binary, e->span);
          bin->binop = op;
          bin->items.push_back(std::move(acc));
          bin->items.push_back(std::move(elems[i]));
          acc = std::move(bin);
        }
        e = std::move(acc);
        return;
      }
      return;
    case Expr::Kind::Binary:
      switch (e->binop) {
        case BinOp::Andalso: {
          // e1 andalso e2 == if e1 then e2 else 0
          auto cond = Expr::make(Expr::Kind::If, e->span);
          cond->items.push_back(std::move(e->items[0]));
          cond->items.push_back(std::move(e->items[1]));
          cond->items.push_back(int_lit(e->span, 0));
          e = std::move(cond);
          return;
        }
        case BinOp::Orelse: {
          // e1 orelse e2 == if e1 then 1 else e2
          auto cond = Expr::make(Expr::Kind::If, e->span);
          cond->items.push_back(std::move(e->items[0]));
          cond->items.push_back(int_lit(e->span, 1));
          cond->items.push_back(std::move(e->items[1]));
          e = std::move(cond);
          return;
        }
        case BinOp::LogAnd:
        case BinOp::LogOr:
        case BinOp::LogXor: {
          // e1 && e2 == (|->e1) & (|->e2), likewise for || and ^^.
          BinOp op = e->binop == BinOp::LogAnd ? BinOp::And
                     : e->binop == BinOp::LogOr ? BinOp::Or : BinOp::Xor;
          auto red = [&](ExprPtr operand) {
            auto r = Expr::make(Expr::Kind::Unary, operand->span);
            r->unop = UnOp::OrReduce;
            r->items.push_back(std::move(operand));
            return r;
          };
          auto bin = Expr::make(Expr::Kind::Binary, e->span);
          bin->binop = op;
          bin->items.push_back(red(std::move(e->items[0])));
          bin->items.push_back(red(std::move(e->items[1])));
          e = std::move(bin);
          return;
        }
        default:
          return;
      }
    default:
      return;
  }
}

}  // namespace

void desugar(Expr& e) {
  desugar_children(e);
  // Desugar the root in place via a temporary owner.
  auto owner = Expr::make(Expr::Kind::UnitLit, e.span);
  std::swap(*owner, e);
  ExprPtr slot = std::move(owner);
  desugar_inplace(slot);
  std::swap(e, *slot);
}

}  // namespace gemini
