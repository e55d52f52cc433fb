#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gemini/source.hpp"
#include "gemini/types.hpp"

namespace gemini {

struct Expr;
struct AstTy;
struct Pattern;
struct Dec;
using ExprPtr = std::unique_ptr<Expr>;
using AstTyPtr = std::unique_ptr<AstTy>;
using PatternPtr = std::unique_ptr<Pattern>;

// ---------------------------------------------------------------------------
// Surface type syntax. Array/temporal size positions hold expressions: the
// grammar writes integer literals there but programs index sizes by staged
// values, so sizes are evaluated during staging when not literal.
// ---------------------------------------------------------------------------

struct AstTy {
  enum class Kind {
    Name,          // int, bit, option, ...
    Apply,         // ty name        (postfix application: int option)
    Var,           // 'a
    SwRecord,      // {l: ty, ...}
    HwRecord,      // #{l: ty, ...}
    Tuple,         // ty * ty        (software tuple sugar)
    HwTuple,       // ty #* ty
    Array,         // ty [e]
    Temporal,      // ty @ e
    List,          // ty list
    Ref,           // ty ref
    Sw,            // ty sw
    Fun,           // ty -> ty
    Module,        // ty ~> ty (printing only; not parsed from source)
  };
  Kind kind;
  Span span;
  std::string name;                                       // Name/Apply/Var
  std::vector<std::pair<std::string, AstTyPtr>> fields;   // records
  std::vector<AstTyPtr> args;                             // everything else
  ExprPtr size;                                           // Array/Temporal
};

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

struct Pattern {
  enum class Kind {
    Int, Real, String,
    Var,        // binder, or nullary constructor (resolved during analysis)
    Ctor,       // C p
    Tuple,      // (p, ..., p)
    Record,     // {l = p, ...}
    Cons,       // p :: p
    List,       // [] / nil / [p, ...]
  };
  Kind kind;
  Span span;
  int64_t int_value = 0;
  double real_value = 0;
  std::string str_value;                                  // Var name, Ctor name
  std::vector<PatternPtr> items;                          // Ctor/Tuple/Cons/List
  std::vector<std::pair<std::string, PatternPtr>> fields; // Record
  // Filled in during semantic analysis.
  bool resolved_ctor = false;
  uint64_t ctor_tag = 0;
};

// ---------------------------------------------------------------------------
// Expressions. Type slots start empty (the placeholder state) and are filled
// with semantic types during decoration.
// ---------------------------------------------------------------------------

enum class UnOp { IntNeg, BitNot, AndReduce, OrReduce, XorReduce, Deref, LogNot };

enum class BinOp {
  Add, Sub, Mul, Div, Mod,
  RAdd, RSub, RMul, RDiv,
  And, Or, Xor,
  LogAnd, LogOr, LogXor,     // && || ^^ (desugared away)
  Shl, Shr, Sar,
  Eq, NotEq, Lt, Gt, Le, Ge,
  Cons, Assign,
  Andalso, Orelse,           // desugared away
};

const char* unop_name(UnOp op);
const char* binop_name(BinOp op);

// One parameter group of a fun/module declaration: a bare identifier, or a
// tuple/record of identifier:type elements that destructures the argument.
struct ParamGroup {
  enum class Kind { Single, Tuple, Record };
  Kind kind = Kind::Single;
  Span span;
  std::vector<std::pair<std::string, AstTyPtr>> params;  // AstTy may be null
};

struct Ctor {
  std::string name;
  AstTyPtr payload;  // null for nullary constructors
  Span span;
};

struct Dec {
  enum class Kind { Val, Fun, Type, Datatype, Module };
  Kind kind;
  Span span;
  std::string name;
  // Val
  ExprPtr rhs;
  AstTyPtr annotation;             // optional: val x : ty / fun result / module result
  // Fun / Module
  std::vector<ParamGroup> groups;  // fun: >=1 groups; module: exactly 1
  ExprPtr body;
  std::optional<std::string> size_param;  // module <:n:>
  // Type / Datatype
  std::vector<std::string> tyvars;
  AstTyPtr ty_rhs;
  bool hardware = false;           // hdatatype
  std::vector<Ctor> ctors;

  // Decoration/inference results. sem_params holds one type per parameter of
  // each group (explicit annotation or fresh metavariable); size_constraints
  // pairs a size variable with the expression that fixes it during staging.
  TypePtr sem_type;
  std::vector<std::vector<TypePtr>> sem_params;
  std::vector<std::pair<int, const Expr*>> size_constraints;
};

struct Expr {
  enum class Kind {
    IntLit, RealLit, StringLit, BitLit,
    Var,           // possibly qualified (List.map)
    ListLit,
    TupleLit,      // (e, e) — desugars to numeric-label record
    UnitLit,       // ()     — desugars to {}
    RecordLit,     // {l = e, ...} or #{...}; hardware tuples #(...) become
                   // hardware RecordLit at desugar
    HwTupleLit,    // #(e, e) — desugars to numeric-label hardware record
    ArrayLit,      // #[e, ...]
    ArrayGen,      // #[size; gen i => body]
    BitArrayBuild, // width 'u: value / 's: / 'r:
    RefLit,        // ref e
    SwWrap,        // sw e
    UnswWrap,      // unsw e
    Unary,
    Binary,
    FieldAccess,   // #l e
    ArrayAccess,   // e [: e :]
    If,            // else may be null before desugar
    Let,
    Seq,           // (e; e; ...)
    App,
    Parameterize,  // e <: e :>
    Case,
    Lambda,        // analysis-only term; no surface syntax
    Location,      // store location (small-step engine)
    WrapHandle,    // wrap-store handle (small-step engine)
  };

  Kind kind;
  Span span;

  // literals
  int64_t int_value = 0;
  double real_value = 0;
  std::string str_value;  // StringLit value, Var name, ArrayGen binder,
                          // FieldAccess label, Lambda parameter

  std::vector<ExprPtr> items;   // children in positional order
  std::vector<std::pair<std::string, ExprPtr>> fields;  // RecordLit
  bool hardware = false;        // RecordLit: #{...} vs {...}

  UnOp unop{};
  BinOp binop{};
  char bits_mode = 0;           // BitArrayBuild: 'u', 's', 'r'

  std::vector<Dec> decs;        // Let
  std::vector<std::pair<PatternPtr, ExprPtr>> arms;  // Case

  AstTyPtr lambda_param_ty;     // Lambda annotation (analysis terms)

  // Filled during decoration/inference: the node's semantic type.
  TypePtr sem_type;

  static ExprPtr make(Kind kind, Span span) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->span = span;
    return e;
  }
};

// Deep copy, used by the small-step engine's substitution and by tests.
ExprPtr clone_expr(const Expr& e);
PatternPtr clone_pattern(const Pattern& p);
AstTyPtr clone_ast_ty(const AstTy& t);

// Stable s-expression rendering of an expression tree (the `--emit ast`
// format; documented in the README).
std::string to_sexpr(const Expr& e);

}  // namespace gemini
