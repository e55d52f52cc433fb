#include "gemini/ast.hpp"

#include <fmt/format.h>

namespace gemini {

const char* unop_name(UnOp op) {
  switch (op) {
    case UnOp::IntNeg: return "~";
    case UnOp::BitNot: return "!";
    case UnOp::AndReduce: return "&->";
    case UnOp::OrReduce: return "|->";
    case UnOp::XorReduce: return "^->";
    case UnOp::Deref: return "$";
    case UnOp::LogNot: return "not";
  }
  return "?";
}

const char* binop_name(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::RAdd: return "+.";
    case BinOp::RSub: return "-.";
    case BinOp::RMul: return "*.";
    case BinOp::RDiv: return "/.";
    case BinOp::And: return "&";
    case BinOp::Or: return "|";
    case BinOp::Xor: return "^";
    case BinOp::LogAnd: return "&&";
    case BinOp::LogOr: return "||";
    case BinOp::LogXor: return "^^";
    case BinOp::Shl: return "<<";
    case BinOp::Shr: return ">>";
    case BinOp::Sar: return ">>>";
    case BinOp::Eq: return "=";
    case BinOp::NotEq: return "<>";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    case BinOp::Cons: return "::";
    case BinOp::Assign: return ":=";
    case BinOp::Andalso: return "andalso";
    case BinOp::Orelse: return "orelse";
  }
  return "?";
}

AstTyPtr clone_ast_ty(const AstTy& t) {
  auto out = std::make_unique<AstTy>();
  out->kind = t.kind;
  out->span = t.span;
  out->name = t.name;
  for (const auto& [label, ty] : t.fields)
    out->fields.emplace_back(label, ty ? clone_ast_ty(*ty) : nullptr);
  for (const auto& a : t.args) out->args.push_back(a ? clone_ast_ty(*a) : nullptr);
  if (t.size) out->size = clone_expr(*t.size);
  return out;
}

PatternPtr clone_pattern(const Pattern& p) {
  auto out = std::make_unique<Pattern>();
  out->kind = p.kind;
  out->span = p.span;
  out->int_value = p.int_value;
  out->real_value = p.real_value;
  out->str_value = p.str_value;
  for (const auto& item : p.items) out->items.push_back(clone_pattern(*item));
  for (const auto& [label, sub] : p.fields)
    out->fields.emplace_back(label, clone_pattern(*sub));
  out->resolved_ctor = p.resolved_ctor;
  out->ctor_tag = p.ctor_tag;
  return out;
}

namespace {

ParamGroup clone_group(const ParamGroup& g) {
  ParamGroup out;
  out.kind = g.kind;
  out.span = g.span;
  for (const auto& [name, ty] : g.params)
    out.params.emplace_back(name, ty ? clone_ast_ty(*ty) : nullptr);
  return out;
}

Dec clone_dec(const Dec& d) {
  Dec out;
  out.kind = d.kind;
  out.span = d.span;
  out.name = d.name;
  if (d.rhs) out.rhs = clone_expr(*d.rhs);
  if (d.annotation) out.annotation = clone_ast_ty(*d.annotation);
  for (const auto& g : d.groups) out.groups.push_back(clone_group(g));
  if (d.body) out.body = clone_expr(*d.body);
  out.size_param = d.size_param;
  out.tyvars = d.tyvars;
  if (d.ty_rhs) out.ty_rhs = clone_ast_ty(*d.ty_rhs);
  out.hardware = d.hardware;
  for (const auto& c : d.ctors) {
    Ctor ctor;
    ctor.name = c.name;
    ctor.span = c.span;
    if (c.payload) ctor.payload = clone_ast_ty(*c.payload);
    out.ctors.push_back(std::move(ctor));
  }
  out.sem_type = d.sem_type;
  out.sem_params = d.sem_params;
  // size_constraints point into the original annotation expressions and are
  // re-derived by analysis; they do not survive cloning.
  return out;
}

}  // namespace

ExprPtr clone_expr(const Expr& e) {
  auto out = std::make_unique<Expr>();
  out->kind = e.kind;
  out->span = e.span;
  out->int_value = e.int_value;
  out->real_value = e.real_value;
  out->str_value = e.str_value;
  for (const auto& item : e.items) out->items.push_back(clone_expr(*item));
  for (const auto& [label, sub] : e.fields)
    out->fields.emplace_back(label, clone_expr(*sub));
  out->hardware = e.hardware;
  out->unop = e.unop;
  out->binop = e.binop;
  out->bits_mode = e.bits_mode;
  for (const auto& d : e.decs) out->decs.push_back(clone_dec(d));
  for (const auto& [pat, body] : e.arms)
    out->arms.emplace_back(clone_pattern(*pat), clone_expr(*body));
  if (e.lambda_param_ty) out->lambda_param_ty = clone_ast_ty(*e.lambda_param_ty);
  out->sem_type = e.sem_type;
  return out;
}

// ---------------------------------------------------------------------------
// S-expression rendering
// ---------------------------------------------------------------------------

namespace {

void sexpr_ty(const AstTy& t, std::string& out);

void sexpr_pattern(const Pattern& p, std::string& out) {
  switch (p.kind) {
    case Pattern::Kind::Int: out += fmt::format("(int-pat {})", p.int_value); return;
    case Pattern::Kind::Real: out += fmt::format("(real-pat {})", p.real_value); return;
    case Pattern::Kind::String: out += fmt::format("(string-pat \"{}\")", p.str_value); return;
    case Pattern::Kind::Var: out += fmt::format("(var-pat {})", p.str_value); return;
    case Pattern::Kind::Ctor:
      out += fmt::format("(ctor-pat {}", p.str_value);
      for (const auto& item : p.items) {
        out += " ";
        sexpr_pattern(*item, out);
      }
      out += ")";
      return;
    case Pattern::Kind::Tuple:
    case Pattern::Kind::List:
      out += p.kind == Pattern::Kind::Tuple ? "(tuple-pat" : "(list-pat";
      for (const auto& item : p.items) {
        out += " ";
        sexpr_pattern(*item, out);
      }
      out += ")";
      return;
    case Pattern::Kind::Record:
      out += "(record-pat";
      for (const auto& [label, sub] : p.fields) {
        out += fmt::format(" ({} ", label);
        sexpr_pattern(*sub, out);
        out += ")";
      }
      out += ")";
      return;
    case Pattern::Kind::Cons:
      out += "(cons-pat ";
      sexpr_pattern(*p.items[0], out);
      out += " ";
      sexpr_pattern(*p.items[1], out);
      out += ")";
      return;
  }
}

void sexpr_rec(const Expr& e, std::string& out);

void sexpr_group(const ParamGroup& g, std::string& out) {
  const char* kind = g.kind == ParamGroup::Kind::Single ? "param"
                     : g.kind == ParamGroup::Kind::Tuple ? "tuple-param"
                                                         : "record-param";
  out += fmt::format("({}", kind);
  for (const auto& [name, ty] : g.params) {
    out += " " + name;
    if (ty) {
      out += ":";
      sexpr_ty(*ty, out);
    }
  }
  out += ")";
}

void sexpr_dec(const Dec& d, std::string& out) {
  switch (d.kind) {
    case Dec::Kind::Val:
      out += fmt::format("(val {} ", d.name);
      sexpr_rec(*d.rhs, out);
      out += ")";
      return;
    case Dec::Kind::Fun:
      out += fmt::format("(fun {} ", d.name);
      for (const auto& g : d.groups) {
        sexpr_group(g, out);
        out += " ";
      }
      sexpr_rec(*d.body, out);
      out += ")";
      return;
    case Dec::Kind::Type:
      out += fmt::format("(type {} ", d.name);
      sexpr_ty(*d.ty_rhs, out);
      out += ")";
      return;
    case Dec::Kind::Datatype:
      out += fmt::format("({} {}", d.hardware ? "hdatatype" : "sdatatype", d.name);
      for (const auto& c : d.ctors) {
        out += fmt::format(" ({}", c.name);
        if (c.payload) {
          out += " ";
          sexpr_ty(*c.payload, out);
        }
        out += ")";
      }
      out += ")";
      return;
    case Dec::Kind::Module:
      out += fmt::format("(module {} ", d.name);
      if (d.size_param) out += fmt::format("(size {}) ", *d.size_param);
      for (const auto& g : d.groups) {
        sexpr_group(g, out);
        out += " ";
      }
      sexpr_rec(*d.body, out);
      out += ")";
      return;
  }
}

void sexpr_ty(const AstTy& t, std::string& out) {
  switch (t.kind) {
    case AstTy::Kind::Name: out += t.name; return;
    case AstTy::Kind::Var: out += "'" + t.name; return;
    case AstTy::Kind::Apply:
      out += "(";
      sexpr_ty(*t.args[0], out);
      out += " " + t.name + ")";
      return;
    case AstTy::Kind::SwRecord:
    case AstTy::Kind::HwRecord:
      out += t.kind == AstTy::Kind::SwRecord ? "(record-ty" : "(hw-record-ty";
      for (const auto& [label, ty] : t.fields) {
        out += fmt::format(" ({} ", label);
        sexpr_ty(*ty, out);
        out += ")";
      }
      out += ")";
      return;
    case AstTy::Kind::Tuple:
    case AstTy::Kind::HwTuple:
      out += t.kind == AstTy::Kind::Tuple ? "(tuple-ty" : "(hw-tuple-ty";
      for (const auto& a : t.args) {
        out += " ";
        sexpr_ty(*a, out);
      }
      out += ")";
      return;
    case AstTy::Kind::Array:
      out += "(array-ty ";
      sexpr_ty(*t.args[0], out);
      out += " ";
      sexpr_rec(*t.size, out);
      out += ")";
      return;
    case AstTy::Kind::Temporal:
      out += "(temporal-ty ";
      sexpr_ty(*t.args[0], out);
      out += " ";
      sexpr_rec(*t.size, out);
      out += ")";
      return;
    case AstTy::Kind::List:
      out += "(list-ty ";
      sexpr_ty(*t.args[0], out);
      out += ")";
      return;
    case AstTy::Kind::Ref:
      out += "(ref-ty ";
      sexpr_ty(*t.args[0], out);
      out += ")";
      return;
    case AstTy::Kind::Sw:
      out += "(sw-ty ";
      sexpr_ty(*t.args[0], out);
      out += ")";
      return;
    case AstTy::Kind::Fun:
      out += "(fun-ty ";
      sexpr_ty(*t.args[0], out);
      out += " ";
      sexpr_ty(*t.args[1], out);
      out += ")";
      return;
    case AstTy::Kind::Module:
      out += "(module-ty ";
      sexpr_ty(*t.args[0], out);
      out += " ";
      sexpr_ty(*t.args[1], out);
      out += ")";
      return;
  }
}

void sexpr_rec(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::IntLit: out += fmt::format("(int {})", e.int_value); return;
    case Expr::Kind::RealLit: out += fmt::format("(real {})", e.real_value); return;
    case Expr::Kind::StringLit: out += fmt::format("(string \"{}\")", e.str_value); return;
    case Expr::Kind::BitLit: out += fmt::format("(bit {})", e.int_value); return;
    case Expr::Kind::Var: out += fmt::format("(var {})", e.str_value); return;
    case Expr::Kind::ListLit:
    case Expr::Kind::ArrayLit:
    case Expr::Kind::TupleLit:
    case Expr::Kind::HwTupleLit:
    case Expr::Kind::Seq: {
      const char* tag = e.kind == Expr::Kind::ListLit ? "list"
                        : e.kind == Expr::Kind::ArrayLit ? "array"
                        : e.kind == Expr::Kind::Seq ? "seq"
                        : e.kind == Expr::Kind::TupleLit ? "tuple" : "hw-tuple";
      out += fmt::format("({}", tag);
      for (const auto& item : e.items) {
        out += " ";
        sexpr_rec(*item, out);
      }
      out += ")";
      return;
    }
    case Expr::Kind::UnitLit: out += "(unit)"; return;
    case Expr::Kind::RecordLit:
      out += e.hardware ? "(hw-record" : "(record";
      for (const auto& [label, sub] : e.fields) {
        out += fmt::format(" ({} ", label);
        sexpr_rec(*sub, out);
        out += ")";
      }
      out += ")";
      return;
    case Expr::Kind::ArrayGen:
      out += fmt::format("(gen-array ");
      sexpr_rec(*e.items[0], out);
      out += fmt::format(" {} ", e.str_value);
      sexpr_rec(*e.items[1], out);
      out += ")";
      return;
    case Expr::Kind::BitArrayBuild:
      out += fmt::format("(bits-{} ", e.bits_mode);
      sexpr_rec(*e.items[0], out);
      out += " ";
      sexpr_rec(*e.items[1], out);
      out += ")";
      return;
    case Expr::Kind::RefLit:
      out += "(ref ";
      sexpr_rec(*e.items[0], out);
      out += ")";
      return;
    case Expr::Kind::SwWrap:
      out += "(sw ";
      sexpr_rec(*e.items[0], out);
      out += ")";
      return;
    case Expr::Kind::UnswWrap:
      out += "(unsw ";
      sexpr_rec(*e.items[0], out);
      out += ")";
      return;
    case Expr::Kind::Unary:
      out += fmt::format("(unary \"{}\" ", unop_name(e.unop));
      sexpr_rec(*e.items[0], out);
      out += ")";
      return;
    case Expr::Kind::Binary:
      out += fmt::format("(binary \"{}\" ", binop_name(e.binop));
      sexpr_rec(*e.items[0], out);
      out += " ";
      sexpr_rec(*e.items[1], out);
      out += ")";
      return;
    case Expr::Kind::FieldAccess:
      out += fmt::format("(field {} ", e.str_value);
      sexpr_rec(*e.items[0], out);
      out += ")";
      return;
    case Expr::Kind::ArrayAccess:
      out += "(index ";
      sexpr_rec(*e.items[0], out);
      out += " ";
      sexpr_rec(*e.items[1], out);
      out += ")";
      return;
    case Expr::Kind::If:
      out += "(if ";
      sexpr_rec(*e.items[0], out);
      out += " ";
      sexpr_rec(*e.items[1], out);
      if (e.items.size() > 2 && e.items[2]) {
        out += " ";
        sexpr_rec(*e.items[2], out);
      }
      out += ")";
      return;
    case Expr::Kind::Let:
      out += "(let (";
      for (size_t i = 0; i < e.decs.size(); ++i) {
        if (i) out += " ";
        sexpr_dec(e.decs[i], out);
      }
      out += ") ";
      sexpr_rec(*e.items[0], out);
      out += ")";
      return;
    case Expr::Kind::App:
      out += "(app ";
      sexpr_rec(*e.items[0], out);
      out += " ";
      sexpr_rec(*e.items[1], out);
      out += ")";
      return;
    case Expr::Kind::Parameterize:
      out += "(parameterize ";
      sexpr_rec(*e.items[0], out);
      out += " ";
      sexpr_rec(*e.items[1], out);
      out += ")";
      return;
    case Expr::Kind::Case:
      out += "(case ";
      sexpr_rec(*e.items[0], out);
      for (const auto& [pat, body] : e.arms) {
        out += " (arm ";
        sexpr_pattern(*pat, out);
        out += " ";
        sexpr_rec(*body, out);
        out += ")";
      }
      out += ")";
      return;
    case Expr::Kind::Lambda:
      out += fmt::format("(lambda {} ", e.str_value);
      sexpr_rec(*e.items[0], out);
      out += ")";
      return;
    case Expr::Kind::Location: out += fmt::format("(loc {})", e.int_value); return;
    case Expr::Kind::WrapHandle: out += fmt::format("(wrap {})", e.int_value); return;
  }
}

}  // namespace

std::string to_sexpr(const Expr& e) {
  std::string out;
  sexpr_rec(e, out);
  return out;
}

}  // namespace gemini
