#include "gemini/lexer.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <unordered_map>

namespace gemini {

namespace {

const std::unordered_map<std::string, TokenKind>& keyword_table() {
  static const std::unordered_map<std::string, TokenKind> table = {
      {"let", TokenKind::KwLet},       {"in", TokenKind::KwIn},
      {"end", TokenKind::KwEnd},       {"val", TokenKind::KwVal},
      {"fun", TokenKind::KwFun},       {"type", TokenKind::KwType},
      {"sdatatype", TokenKind::KwSdatatype},
      {"hdatatype", TokenKind::KwHdatatype},
      {"module", TokenKind::KwModule}, {"if", TokenKind::KwIf},
      {"then", TokenKind::KwThen},     {"else", TokenKind::KwElse},
      {"case", TokenKind::KwCase},     {"of", TokenKind::KwOf},
      {"ref", TokenKind::KwRef},       {"sw", TokenKind::KwSw},
      {"unsw", TokenKind::KwUnsw},     {"nil", TokenKind::KwNil},
      {"gen", TokenKind::KwGen},       {"andalso", TokenKind::KwAndalso},
      {"orelse", TokenKind::KwOrelse}, {"not", TokenKind::KwNot},
  };
  return table;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_hex_digit(char c) {
  return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

int hex_value(char c) {
  if (is_digit(c)) return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return c - 'A' + 10;
}

struct Lexer {
  const SourceFile& file;
  DiagnosticSink& diags;
  const std::string& src;
  uint32_t pos = 0;

  Lexer(const SourceFile& f, DiagnosticSink& d) : file(f), diags(d), src(f.text()) {}

  char peek(uint32_t ahead = 0) const {
    return pos + ahead < src.size() ? src[pos + ahead] : '\0';
  }
  bool starts_with(const char* s) const {
    return src.compare(pos, std::strlen(s), s) == 0;
  }

  Span span_from(uint32_t begin) const { return file.span(begin, pos); }

  Token make(TokenKind kind, uint32_t begin) {
    Token t;
    t.kind = kind;
    t.text = src.substr(begin, pos - begin);
    t.span = span_from(begin);
    return t;
  }

  // Skips whitespace and (*-nested-*) comments. Unterminated comments are
  // reported at end of file, mirroring the balanced-depth requirement.
  void skip_trivia() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
        continue;
      }
      if (c == '(' && peek(1) == '*') {
        uint32_t begin = pos;
        int depth = 1;
        pos += 2;
        while (pos < src.size() && depth > 0) {
          if (src[pos] == '(' && peek(1) == '*') { depth++; pos += 2; }
          else if (src[pos] == '*' && peek(1) == ')') { depth--; pos += 2; }
          else ++pos;
        }
        if (depth != 0) {
          diags.error(Code::UnterminatedComment, span_from(begin),
                      "unterminated comment at end of file");
        }
        continue;
      }
      break;
    }
  }

  Token lex_string() {
    uint32_t begin = pos;
    ++pos;  // opening quote
    std::string value;
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '"') {
        ++pos;
        Token t = make(TokenKind::StringLit, begin);
        t.str_value = std::move(value);
        return t;
      }
      if (c == '\n') break;  // strings do not span lines
      if (c == '\\') {
        ++pos;
        char e = peek();
        switch (e) {
          case '\\': value += '\\'; ++pos; break;
          case '\'': value += '\''; ++pos; break;
          case '"': value += '"'; ++pos; break;
          case 'a': value += '\a'; ++pos; break;
          case 'b': value += '\b'; ++pos; break;
          case 'e': value += '\x1b'; ++pos; break;
          case 'f': value += '\f'; ++pos; break;
          case 'n': value += '\n'; ++pos; break;
          case 'r': value += '\r'; ++pos; break;
          case 't': value += '\t'; ++pos; break;
          case '0': value += '\0'; ++pos; break;
          default:
            // Hex escape: exactly two hex digits.
            if (is_hex_digit(e) && is_hex_digit(peek(1))) {
              value += static_cast<char>(hex_value(e) * 16 + hex_value(peek(1)));
              pos += 2;
            } else {
              diags.error(Code::IllegalCharacter, span_from(pos),
                          fmt::format("invalid escape sequence '\\{}'", e));
              ++pos;
            }
        }
        continue;
      }
      value += c;
      ++pos;
    }
    diags.error(Code::UnterminatedString, span_from(begin),
                "unterminated string literal");
    Token t = make(TokenKind::StringLit, begin);
    t.str_value = std::move(value);
    return t;
  }

  // Base-prefixed integer: #'b: #'o: #'x: #'h:  (h accepted alongside x).
  Token lex_based_int() {
    uint32_t begin = pos;
    char base_char = src[pos + 2];
    pos += 4;  // consume #'B:
    auto digit_ok = [&](char c) {
      switch (base_char) {
        case 'b': return c == '0' || c == '1';
        case 'o': return c >= '0' && c <= '7';
        default: return is_hex_digit(c);
      }
    };
    uint32_t digits_begin = pos;
    while (pos < src.size() && digit_ok(src[pos])) ++pos;
    Token t = make(TokenKind::IntLit, begin);
    if (pos == digits_begin) {
      diags.error(Code::BadIntegerLiteral, t.span,
                  "integer literal is missing digits for its base");
      return t;
    }
    auto decoded = decode_integer(t.text);
    if (!decoded) {
      diags.error(Code::BadIntegerLiteral, t.span,
                  fmt::format("integer literal '{}' does not fit in 32 bits", t.text));
      return t;
    }
    t.int_value = *decoded;
    return t;
  }

  // Decimal integer or real, with optional leading ~ already consumed by
  // the caller deciding this is a literal.
  Token lex_number(uint32_t begin) {
    while (is_digit(peek())) ++pos;
    bool is_real = false;
    if (peek() == '.' && is_digit(peek(1))) {
      is_real = true;
      ++pos;
      while (is_digit(peek())) ++pos;
    } else if (peek() == '.' && !is_ident_start(peek(1)) && peek(1) != '.') {
      // Trailing-dot real like "3." (grammar allows an empty fraction).
      is_real = true;
      ++pos;
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (is_digit(peek(1)) || (peek(1) == '~' && is_digit(peek(2))))) {
      is_real = true;
      ++pos;
      if (peek() == '~') ++pos;
      while (is_digit(peek())) ++pos;
    }
    if (is_real) {
      Token t = make(TokenKind::RealLit, begin);
      std::string digits = t.text;
      for (auto& c : digits)
        if (c == '~') c = '-';
      t.real_value = std::strtod(digits.c_str(), nullptr);
      return t;
    }
    Token t = make(TokenKind::IntLit, begin);
    auto decoded = decode_integer(t.text);
    if (!decoded) {
      diags.error(Code::BadIntegerLiteral, t.span,
                  fmt::format("integer literal '{}' does not fit in 32 bits", t.text));
      return t;
    }
    t.int_value = *decoded;
    return t;
  }

  Token next() {
    skip_trivia();
    uint32_t begin = pos;
    if (pos >= src.size()) return make(TokenKind::Eof, begin);
    char c = src[pos];

    if (is_ident_start(c)) {
      while (is_ident_char(peek())) ++pos;
      Token t = make(TokenKind::Ident, begin);
      auto it = keyword_table().find(t.text);
      if (it != keyword_table().end()) {
        t.kind = it->second;
      } else {
        t.str_value = t.text;
      }
      return t;
    }

    if (is_digit(c)) return lex_number(begin);
    if (c == '.' && is_digit(peek(1))) return lex_number(begin);
    if (c == '"') return lex_string();

    // ~ immediately followed by a digit (or a fraction start) is a signed
    // literal, matching the grammar's <sign> <decimal-digits> production.
    if (c == '~' && (is_digit(peek(1)) || (peek(1) == '.' && is_digit(peek(2))))) {
      ++pos;
      Token t = lex_number(begin);
      if (t.kind == TokenKind::IntLit) {
        auto decoded = decode_integer(t.text);
        if (decoded) t.int_value = *decoded;
        else
          diags.error(Code::BadIntegerLiteral, t.span,
                      fmt::format("integer literal '{}' does not fit in 32 bits", t.text));
      }
      return t;
    }

    // Quote forms: bit literal 'b:0, bit-array builders 's: 'u: 'r:,
    // otherwise a type variable 'name.
    if (c == '\'') {
      if (peek(1) == 'b' && peek(2) == ':' && (peek(3) == '0' || peek(3) == '1')) {
        pos += 4;
        Token t = make(TokenKind::BitLit, begin);
        t.int_value = t.text[3] - '0';
        return t;
      }
      if ((peek(1) == 's' || peek(1) == 'u' || peek(1) == 'r') && peek(2) == ':') {
        char mode = peek(1);
        pos += 3;
        return make(mode == 's' ? TokenKind::BitsSigned
                    : mode == 'u' ? TokenKind::BitsUnsigned
                                  : TokenKind::BitsRepl,
                    begin);
      }
      if (is_ident_start(peek(1))) {
        ++pos;
        while (is_ident_char(peek())) ++pos;
        Token t = make(TokenKind::TyVar, begin);
        t.str_value = t.text.substr(1);
        return t;
      }
      diags.error(Code::IllegalCharacter, file.span(begin, begin + 1),
                  "stray quote character");
      ++pos;
      return next();
    }

    if (c == '#') {
      if (peek(1) == '\'' && (peek(2) == 'b' || peek(2) == 'o' || peek(2) == 'x' ||
                              peek(2) == 'h') && peek(3) == ':') {
        return lex_based_int();
      }
      if (peek(1) == '(') { pos += 2; return make(TokenKind::HashParen, begin); }
      if (peek(1) == '[') { pos += 2; return make(TokenKind::HashBrack, begin); }
      if (peek(1) == '{') { pos += 2; return make(TokenKind::HashBrace, begin); }
      if (peek(1) == '*') { pos += 2; return make(TokenKind::HashStar, begin); }
      ++pos;
      return make(TokenKind::Hash, begin);
    }

    // Multi-character operators, longest first.
    struct Rule { const char* text; TokenKind kind; };
    static const Rule rules[] = {
        {">>>", TokenKind::Sar},
        {"&->", TokenKind::AmpArrow},
        {"|->", TokenKind::PipeArrow},
        {"^->", TokenKind::CaretArrow},
        {"<<", TokenKind::Shl},
        {">>", TokenKind::Shr},
        {"&&", TokenKind::AmpAmp},
        {"||", TokenKind::PipePipe},
        {"^^", TokenKind::CaretCaret},
        {"::", TokenKind::ColonColon},
        {":=", TokenKind::Assign},
        {"->", TokenKind::Arrow},
        {"=>", TokenKind::DArrow},
        {"<>", TokenKind::NotEq},
        {"<=", TokenKind::Le},
        {">=", TokenKind::Ge},
        {"+.", TokenKind::PlusDot},
        {"-.", TokenKind::MinusDot},
        {"*.", TokenKind::StarDot},
        {"/.", TokenKind::SlashDot},
        {"[:", TokenKind::LBrackColon},
        {":]", TokenKind::ColonRBrack},
        {"<:", TokenKind::LtColon},
        {":>", TokenKind::ColonGt},
        {">:", TokenKind::ColonGt},
        {"|:", TokenKind::BarColon},
        {"+", TokenKind::Plus},
        {"-", TokenKind::Minus},
        {"*", TokenKind::Star},
        {"/", TokenKind::Slash},
        {"%", TokenKind::Percent},
        {"~", TokenKind::Tilde},
        {"!", TokenKind::Bang},
        {"&", TokenKind::Amp},
        {"|", TokenKind::Pipe},
        {"^", TokenKind::Caret},
        {"=", TokenKind::Eq},
        {"<", TokenKind::Lt},
        {">", TokenKind::Gt},
        {"$", TokenKind::Dollar},
        {".", TokenKind::Dot},
        {",", TokenKind::Comma},
        {";", TokenKind::Semi},
        {":", TokenKind::Colon},
        {"@", TokenKind::At},
        {"(", TokenKind::LParen},
        {")", TokenKind::RParen},
        {"[", TokenKind::LBrack},
        {"]", TokenKind::RBrack},
        {"{", TokenKind::LBrace},
        {"}", TokenKind::RBrace},
    };
    for (const auto& rule : rules) {
      if (starts_with(rule.text)) {
        pos += static_cast<uint32_t>(std::strlen(rule.text));
        return make(rule.kind, begin);
      }
    }

    diags.error(Code::IllegalCharacter, file.span(begin, begin + 1),
                fmt::format("illegal character '{}'", c));
    ++pos;
    return next();
  }
};

}  // namespace

std::optional<int32_t> decode_integer(const std::string& lexeme) {
  bool negative = false;
  size_t i = 0;
  int base = 10;
  if (!lexeme.empty() && lexeme[0] == '~') {
    negative = true;
    i = 1;
  }
  if (lexeme.compare(i, 4, "#'b:") == 0) { base = 2; i += 4; }
  else if (lexeme.compare(i, 4, "#'o:") == 0) { base = 8; i += 4; }
  else if (lexeme.compare(i, 4, "#'x:") == 0 || lexeme.compare(i, 4, "#'h:") == 0) {
    base = 16;
    i += 4;
  }
  if (i >= lexeme.size()) return std::nullopt;
  int64_t value = 0;
  for (; i < lexeme.size(); ++i) {
    char c = lexeme[i];
    int digit;
    if (is_digit(c)) digit = c - '0';
    else if (is_hex_digit(c)) digit = hex_value(c);
    else return std::nullopt;
    if (digit >= base) return std::nullopt;
    value = value * base + digit;
    if (value > (negative ? 2147483648LL : 2147483647LL)) return std::nullopt;
  }
  return static_cast<int32_t>(negative ? -value : value);
}

std::vector<Token> tokenize(const SourceFile& file, DiagnosticSink& diags) {
  Lexer lexer(file, diags);
  std::vector<Token> tokens;
  for (;;) {
    Token t = lexer.next();
    bool at_end = t.kind == TokenKind::Eof;
    tokens.push_back(std::move(t));
    if (at_end) break;
  }
  return tokens;
}

const char* token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Eof: return "EOF";
    case TokenKind::KwLet: return "LET";
    case TokenKind::KwIn: return "IN";
    case TokenKind::KwEnd: return "END";
    case TokenKind::KwVal: return "VAL";
    case TokenKind::KwFun: return "FUN";
    case TokenKind::KwType: return "TYPE";
    case TokenKind::KwSdatatype: return "SDATATYPE";
    case TokenKind::KwHdatatype: return "HDATATYPE";
    case TokenKind::KwModule: return "MODULE";
    case TokenKind::KwIf: return "IF";
    case TokenKind::KwThen: return "THEN";
    case TokenKind::KwElse: return "ELSE";
    case TokenKind::KwCase: return "CASE";
    case TokenKind::KwOf: return "OF";
    case TokenKind::KwRef: return "REF";
    case TokenKind::KwSw: return "SW";
    case TokenKind::KwUnsw: return "UNSW";
    case TokenKind::KwNil: return "NIL";
    case TokenKind::KwGen: return "GEN";
    case TokenKind::KwAndalso: return "ANDALSO";
    case TokenKind::KwOrelse: return "ORELSE";
    case TokenKind::KwNot: return "NOT";
    case TokenKind::IntLit: return "INT";
    case TokenKind::RealLit: return "REAL";
    case TokenKind::StringLit: return "STRING";
    case TokenKind::BitLit: return "BIT";
    case TokenKind::Ident: return "IDENT";
    case TokenKind::TyVar: return "TYVAR";
    case TokenKind::Plus: return "PLUS";
    case TokenKind::Minus: return "MINUS";
    case TokenKind::Star: return "STAR";
    case TokenKind::Slash: return "SLASH";
    case TokenKind::Percent: return "PERCENT";
    case TokenKind::PlusDot: return "PLUSDOT";
    case TokenKind::MinusDot: return "MINUSDOT";
    case TokenKind::StarDot: return "STARDOT";
    case TokenKind::SlashDot: return "SLASHDOT";
    case TokenKind::Tilde: return "TILDE";
    case TokenKind::Bang: return "BANG";
    case TokenKind::Amp: return "AMP";
    case TokenKind::Pipe: return "PIPE";
    case TokenKind::Caret: return "CARET";
    case TokenKind::AmpAmp: return "AMPAMP";
    case TokenKind::PipePipe: return "PIPEPIPE";
    case TokenKind::CaretCaret: return "CARETCARET";
    case TokenKind::AmpArrow: return "ANDRED";
    case TokenKind::PipeArrow: return "ORRED";
    case TokenKind::CaretArrow: return "XORRED";
    case TokenKind::Shl: return "SHL";
    case TokenKind::Shr: return "SHR";
    case TokenKind::Sar: return "SAR";
    case TokenKind::Eq: return "EQ";
    case TokenKind::NotEq: return "NEQ";
    case TokenKind::Lt: return "LT";
    case TokenKind::Gt: return "GT";
    case TokenKind::Le: return "LE";
    case TokenKind::Ge: return "GE";
    case TokenKind::ColonColon: return "CONS";
    case TokenKind::Assign: return "ASSIGN";
    case TokenKind::Arrow: return "ARROW";
    case TokenKind::DArrow: return "DARROW";
    case TokenKind::Dollar: return "DOLLAR";
    case TokenKind::Hash: return "HASH";
    case TokenKind::Dot: return "DOT";
    case TokenKind::BitsSigned: return "BITS_S";
    case TokenKind::BitsUnsigned: return "BITS_U";
    case TokenKind::BitsRepl: return "BITS_R";
    case TokenKind::LParen: return "LPAREN";
    case TokenKind::RParen: return "RPAREN";
    case TokenKind::LBrack: return "LBRACK";
    case TokenKind::RBrack: return "RBRACK";
    case TokenKind::LBrace: return "LBRACE";
    case TokenKind::RBrace: return "RBRACE";
    case TokenKind::HashParen: return "HASHPAREN";
    case TokenKind::HashBrack: return "HASHBRACK";
    case TokenKind::HashBrace: return "HASHBRACE";
    case TokenKind::HashStar: return "HASHSTAR";
    case TokenKind::LBrackColon: return "LBRACKCOLON";
    case TokenKind::ColonRBrack: return "COLONRBRACK";
    case TokenKind::LtColon: return "LTCOLON";
    case TokenKind::ColonGt: return "COLONGT";
    case TokenKind::Comma: return "COMMA";
    case TokenKind::Semi: return "SEMI";
    case TokenKind::Colon: return "COLON";
    case TokenKind::At: return "AT";
    case TokenKind::BarColon: return "BARCOLON";
  }
  return "?";
}

std::string dump_tokens(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (t.kind == TokenKind::Eof) break;
    out += fmt::format("{} \"{}\" @{}:{}\n", token_kind_name(t.kind), t.text,
                       t.span.line, t.span.column);
  }
  return out;
}

}  // namespace gemini
