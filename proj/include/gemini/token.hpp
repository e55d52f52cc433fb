#pragma once

#include <cstdint>
#include <string>

#include "gemini/source.hpp"

namespace gemini {

enum class TokenKind {
  Eof,
  // keywords
  KwLet, KwIn, KwEnd, KwVal, KwFun, KwType, KwSdatatype, KwHdatatype,
  KwModule, KwIf, KwThen, KwElse, KwCase, KwOf, KwRef, KwSw, KwUnsw,
  KwNil, KwGen, KwAndalso, KwOrelse, KwNot,
  // literals
  IntLit, RealLit, StringLit, BitLit, Ident, TyVar,
  // operators
  Plus, Minus, Star, Slash, Percent,
  PlusDot, MinusDot, StarDot, SlashDot,
  Tilde, Bang,
  Amp, Pipe, Caret,
  AmpAmp, PipePipe, CaretCaret,
  AmpArrow, PipeArrow, CaretArrow,   // &->  |->  ^->
  Shl, Shr, Sar,                     // <<  >>  >>>
  Eq, NotEq, Lt, Gt, Le, Ge,
  ColonColon, Assign,                // ::  :=
  Arrow, DArrow,                     // ->  =>
  Dollar, Hash, Dot,
  BitsSigned, BitsUnsigned, BitsRepl,  // 's:  'u:  'r:
  // punctuation
  LParen, RParen, LBrack, RBrack, LBrace, RBrace,
  HashParen, HashBrack, HashBrace,   // #(  #[  #{
  HashStar,                          // #*  (hardware tuple type)
  LBrackColon, ColonRBrack,          // [:  :]
  LtColon, ColonGt,                  // <:  :>
  Comma, Semi, Colon, At, BarColon,  // |:
};

const char* token_kind_name(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::Eof;
  std::string text;     // original lexeme
  Span span;
  int64_t int_value = 0;    // IntLit (already base-10), BitLit (0/1)
  double real_value = 0.0;  // RealLit
  std::string str_value;    // StringLit (unescaped), Ident, TyVar (without ')
};

}  // namespace gemini
