#include "beamobf/term.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace beamobf {

Term Term::atom(std::string name) {
  Term t;
  t.value_ = Atom{std::move(name)};
  return t;
}

Term Term::integer(BigInt v) {
  Term t;
  t.value_ = std::move(v);
  return t;
}

Term Term::real(double v) {
  Term t;
  t.value_ = v;
  return t;
}

Term Term::binary(std::vector<std::uint8_t> bytes, std::uint64_t bit_size) {
  Term t;
  t.value_ = Binary{std::move(bytes), bit_size};
  return t;
}

Term Term::binary(std::vector<std::uint8_t> bytes) {
  std::uint64_t bits = 8 * static_cast<std::uint64_t>(bytes.size());
  return binary(std::move(bytes), bits);
}

Term Term::tuple(TermVec elems) {
  Term t;
  t.value_ = Tuple{std::move(elems)};
  return t;
}

Term Term::list(TermVec elems) {
  Term t;
  t.value_ = List{std::move(elems), nullptr};
  return t;
}

Term Term::list(TermVec elems, Term tail) {
  if (tail.is_nil()) return list(std::move(elems));
  Term t;
  t.value_ = List{std::move(elems), std::make_shared<const Term>(std::move(tail))};
  return t;
}

Term Term::charlist(std::string_view chars) {
  TermVec elems;
  elems.reserve(chars.size());
  for (unsigned char c : chars) elems.push_back(Term::integer(c));
  return list(std::move(elems));
}

bool Term::is_byte_list() const {
  if (!is_proper_list()) return false;
  for (const Term& e : list_parts().elems) {
    if (!e.is_int()) return false;
    if (e.int_value() < 0 || e.int_value() > 255) return false;
  }
  return true;
}

long long Term::small_int() const {
  const BigInt& v = int_value();
  if (v < std::numeric_limits<long long>::min() ||
      v > std::numeric_limits<long long>::max())
    throw std::runtime_error("integer too large for this context");
  return v.convert_to<long long>();
}

bool operator==(const Term& a, const Term& b) {
  if (a.value_.index() != b.value_.index()) return false;
  switch (a.kind()) {
    case TermKind::AtomT:
      return a.atom_name() == b.atom_name();
    case TermKind::IntT:
      return a.int_value() == b.int_value();
    case TermKind::FloatT:
      return a.float_value() == b.float_value();
    case TermKind::BinaryT:
      return a.bin().bit_size == b.bin().bit_size && a.bin().bytes == b.bin().bytes;
    case TermKind::TupleT:
      return a.tuple_elems() == b.tuple_elems();
    case TermKind::ListT: {
      const List& la = a.list_parts();
      const List& lb = b.list_parts();
      if (la.elems != lb.elems) return false;
      if (!la.tail && !lb.tail) return true;
      if (!la.tail || !lb.tail) return false;
      return *la.tail == *lb.tail;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  LBrace, RBrace, LBracket, RBracket, Pipe, Comma, Colon,
  BinOpen, BinClose, FormDot, Int, Float, AtomTok, StringTok, End
};

struct Token {
  Tok kind;
  std::string text;       // atom name or string bytes
  BigInt int_value;
  double float_value = 0;
  std::size_t line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  const Token& peek() {
    if (!has_tok_) {
      tok_ = scan();
      has_tok_ = true;
    }
    return tok_;
  }

  Token next() {
    const Token& t = peek();
    Token out = t;
    has_tok_ = false;
    return out;
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t line, std::size_t col) {
    throw ParseError(msg, line, col);
  }
  [[noreturn]] void fail_here(const std::string& msg) { fail(msg, line_, col_); }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1, col_ = 1;
  Token tok_;
  bool has_tok_ = false;

  bool eof() const { return pos_ >= text_.size(); }
  char cur() const { return text_[pos_]; }
  char at(std::size_t off) const {
    return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (!eof()) {
      char c = cur();
      if (c == '%') {
        while (!eof() && cur() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  static bool atom_start(char c) { return c >= 'a' && c <= 'z'; }
  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@';
  }

  Token make(Tok k) {
    Token t;
    t.kind = k;
    t.line = line_;
    t.col = col_;
    return t;
  }

  unsigned char read_escape() {
    // Called after the backslash has been consumed.
    if (eof()) fail_here("unterminated escape sequence");
    char c = cur();
    advance();
    switch (c) {
      case 'n': return '\n';
      case 'r': return '\r';
      case 't': return '\t';
      case 'v': return '\v';
      case 'b': return '\b';
      case 'f': return '\f';
      case 'e': return 0x1b;
      case 's': return ' ';
      case 'd': return 0x7f;
      case '0': return 0;
      case '\\': return '\\';
      case '\'': return '\'';
      case '"': return '"';
      case 'x': {
        unsigned v = 0;
        if (!eof() && cur() == '{') {
          advance();
          while (!eof() && cur() != '}') {
            v = v * 16 + hex_digit(cur());
            advance();
          }
          if (eof()) fail_here("unterminated \\x{ escape");
          advance();
        } else {
          for (int i = 0; i < 2; ++i) {
            if (eof()) fail_here("truncated \\x escape");
            v = v * 16 + hex_digit(cur());
            advance();
          }
        }
        return static_cast<unsigned char>(v);
      }
      default:
        if (c >= '1' && c <= '7') {
          unsigned v = static_cast<unsigned>(c - '0');
          for (int i = 0; i < 2 && !eof() && cur() >= '0' && cur() <= '7'; ++i) {
            v = v * 8 + static_cast<unsigned>(cur() - '0');
            advance();
          }
          return static_cast<unsigned char>(v);
        }
        fail_here(std::string("unknown escape sequence \\") + c);
    }
  }

  unsigned hex_digit(char c) {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    fail_here("bad hex digit in escape");
  }

  Token scan_number(bool negative) {
    Token t = make(Tok::Int);
    std::string digits;
    while (!eof() && std::isdigit(static_cast<unsigned char>(cur()))) {
      digits.push_back(cur());
      advance();
    }
    // base#value notation
    if (!eof() && cur() == '#') {
      int base = std::stoi(digits);
      if (base < 2 || base > 36) fail_here("radix out of range");
      advance();
      BigInt v = 0;
      bool any = false;
      while (!eof() && std::isalnum(static_cast<unsigned char>(cur()))) {
        char c = cur();
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'z') d = c - 'a' + 10;
        else d = c - 'A' + 10;
        if (d >= base) fail_here("digit out of range for radix");
        v = v * base + d;
        any = true;
        advance();
      }
      if (!any) fail_here("missing digits after radix");
      t.int_value = negative ? BigInt(-v) : v;
      return t;
    }
    bool is_float = false;
    std::string text = digits;
    if (!eof() && cur() == '.' && std::isdigit(static_cast<unsigned char>(at(1)))) {
      is_float = true;
      text.push_back('.');
      advance();
      while (!eof() && std::isdigit(static_cast<unsigned char>(cur()))) {
        text.push_back(cur());
        advance();
      }
    }
    if (!eof() && (cur() == 'e' || cur() == 'E')) {
      char sign = at(1);
      std::size_t digit_at = (sign == '+' || sign == '-') ? 2 : 1;
      if (std::isdigit(static_cast<unsigned char>(at(digit_at)))) {
        is_float = true;
        text.push_back(cur());
        advance();
        if (cur() == '+' || cur() == '-') {
          text.push_back(cur());
          advance();
        }
        while (!eof() && std::isdigit(static_cast<unsigned char>(cur()))) {
          text.push_back(cur());
          advance();
        }
      }
    }
    if (is_float) {
      t.kind = Tok::Float;
      double v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size())
        fail_here("float literal out of range");
      t.float_value = negative ? -v : v;
      return t;
    }
    t.int_value = BigInt(digits);
    if (negative) t.int_value = -t.int_value;
    return t;
  }

  Token scan() {
    skip_space_and_comments();
    Token t = make(Tok::End);
    if (eof()) return t;
    char c = cur();
    switch (c) {
      case '{': advance(); t.kind = Tok::LBrace; return t;
      case '}': advance(); t.kind = Tok::RBrace; return t;
      case '[': advance(); t.kind = Tok::LBracket; return t;
      case ']': advance(); t.kind = Tok::RBracket; return t;
      case '|': advance(); t.kind = Tok::Pipe; return t;
      case ',': advance(); t.kind = Tok::Comma; return t;
      case ':': advance(); t.kind = Tok::Colon; return t;
      case '<':
        if (at(1) == '<') {
          advance(); advance();
          t.kind = Tok::BinOpen;
          return t;
        }
        fail_here("unexpected '<'");
      case '>':
        if (at(1) == '>') {
          advance(); advance();
          t.kind = Tok::BinClose;
          return t;
        }
        fail_here("unexpected '>'");
      case '.': {
        char n = at(1);
        if (n == '\0' || std::isspace(static_cast<unsigned char>(n)) || n == '%') {
          advance();
          t.kind = Tok::FormDot;
          return t;
        }
        fail_here("misplaced '.'");
      }
      case '-':
      case '+': {
        bool neg = c == '-';
        if (!std::isdigit(static_cast<unsigned char>(at(1))))
          fail_here(std::string("unexpected '") + c + "'");
        advance();
        Token n = scan_number(neg);
        n.line = t.line;
        n.col = t.col;
        return n;
      }
      case '"': {
        advance();
        t.kind = Tok::StringTok;
        while (true) {
          if (eof()) fail("unterminated string", t.line, t.col);
          char ch = cur();
          if (ch == '"') {
            advance();
            break;
          }
          if (ch == '\\') {
            advance();
            t.text.push_back(static_cast<char>(read_escape()));
          } else {
            t.text.push_back(ch);
            advance();
          }
        }
        return t;
      }
      case '\'': {
        advance();
        t.kind = Tok::AtomTok;
        while (true) {
          if (eof()) fail("unterminated quoted atom", t.line, t.col);
          char ch = cur();
          if (ch == '\'') {
            advance();
            break;
          }
          if (ch == '\\') {
            advance();
            t.text.push_back(static_cast<char>(read_escape()));
          } else {
            t.text.push_back(ch);
            advance();
          }
        }
        return t;
      }
      default:
        if (std::isdigit(static_cast<unsigned char>(c))) {
          Token n = scan_number(false);
          n.line = t.line;
          n.col = t.col;
          return n;
        }
        if (atom_start(c)) {
          t.kind = Tok::AtomTok;
          while (!eof() && name_char(cur())) {
            t.text.push_back(cur());
            advance();
          }
          return t;
        }
        fail_here(std::string("unexpected character '") + c + "'");
    }
  }
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
  explicit Parser(std::string_view text) : lex_(text) {}

  std::vector<Term> forms() {
    std::vector<Term> out;
    while (lex_.peek().kind != Tok::End) {
      out.push_back(term(0));
      expect(Tok::FormDot, "expected '.' to end the form");
    }
    return out;
  }

private:
  Lexer lex_;

  Token expect(Tok k, const char* msg) {
    Token t = lex_.next();
    if (t.kind != k) lex_.fail(msg, t.line, t.col);
    return t;
  }

  Term term(std::size_t depth) {
    if (depth > kMaxTermDepth) {
      const Token& t = lex_.peek();
      lex_.fail("maximum term nesting depth exceeded", t.line, t.col);
    }
    Token t = lex_.next();
    Term out;
    switch (t.kind) {
      case Tok::Int:
        out = Term::integer(std::move(t.int_value));
        break;
      case Tok::Float:
        out = Term::real(t.float_value);
        break;
      case Tok::AtomTok:
        out = Term::atom(std::move(t.text));
        break;
      case Tok::StringTok:
        out = Term::charlist(t.text);
        break;
      case Tok::LBrace: {
        TermVec elems;
        if (lex_.peek().kind == Tok::RBrace) {
          lex_.next();
        } else {
          while (true) {
            elems.push_back(term(depth + 1));
            Token sep = lex_.next();
            if (sep.kind == Tok::RBrace) break;
            if (sep.kind != Tok::Comma)
              lex_.fail("expected ',' or '}' in tuple", sep.line, sep.col);
          }
        }
        out = Term::tuple(std::move(elems));
        break;
      }
      case Tok::LBracket: {
        TermVec elems;
        Term tail = Term::nil();
        if (lex_.peek().kind == Tok::RBracket) {
          lex_.next();
        } else {
          while (true) {
            elems.push_back(term(depth + 1));
            Token sep = lex_.next();
            if (sep.kind == Tok::RBracket) break;
            if (sep.kind == Tok::Pipe) {
              tail = term(depth + 1);
              expect(Tok::RBracket, "expected ']' after list tail");
              break;
            }
            if (sep.kind != Tok::Comma)
              lex_.fail("expected ',', '|' or ']' in list", sep.line, sep.col);
          }
        }
        out = Term::list(std::move(elems), std::move(tail));
        break;
      }
      case Tok::BinOpen: {
        out = binary_body(t);
        break;
      }
      default:
        lex_.fail("expected a term", t.line, t.col);
    }
    out.line = t.line;
    out.col = t.col;
    return out;
  }

  Term binary_body(const Token& open) {
    std::vector<std::uint8_t> bytes;
    std::uint64_t bits = 0;
    auto push_bits = [&](const BigInt& value, std::uint64_t nbits) {
      for (std::uint64_t i = 0; i < nbits; ++i) {
        std::uint64_t shift = nbits - 1 - i;
        int bit = ((value >> static_cast<unsigned>(shift)) & 1).convert_to<int>();
        std::uint64_t idx = bits / 8;
        if (idx >= bytes.size()) bytes.push_back(0);
        if (bit) bytes[idx] |= static_cast<std::uint8_t>(0x80u >> (bits % 8));
        ++bits;
      }
    };
    if (lex_.peek().kind == Tok::BinClose) {
      lex_.next();
      return Term::binary({}, 0);
    }
    while (true) {
      Token seg = lex_.next();
      if (seg.kind == Tok::StringTok) {
        for (unsigned char c : seg.text) push_bits(BigInt(c), 8);
      } else if (seg.kind == Tok::Int) {
        std::uint64_t size = 8;
        if (lex_.peek().kind == Tok::Colon) {
          lex_.next();
          Token sz = lex_.next();
          if (sz.kind != Tok::Int || sz.int_value < 0)
            lex_.fail("expected bit size after ':'", sz.line, sz.col);
          size = sz.int_value.convert_to<std::uint64_t>();
        }
        BigInt v = seg.int_value;
        if (v < 0) {
          // two's complement within the segment width
          v += BigInt(1) << static_cast<unsigned>(size);
        }
        push_bits(v, size);
      } else {
        lex_.fail("expected integer or string segment in binary", seg.line, seg.col);
      }
      Token sep = lex_.next();
      if (sep.kind == Tok::BinClose) break;
      if (sep.kind != Tok::Comma)
        lex_.fail("expected ',' or '>>' in binary", sep.line, sep.col);
    }
    Term t = Term::binary(std::move(bytes), bits);
    t.line = open.line;
    t.col = open.col;
    return t;
  }
};

// ---------------------------------------------------------------------------
// Printer

const std::array<std::string_view, 26> kReservedWords = {
    "after",  "and",    "andalso", "band",  "begin", "bnot", "bor",
    "bsl",    "bsr",    "bxor",    "case",  "catch", "cond", "div",
    "end",    "fun",    "if",      "let",   "not",   "of",   "or",
    "orelse", "receive", "rem",    "try",   "when"};

void print_term_rec(std::string& out, const Term& t);

void print_atom(std::string& out, const std::string& name) {
  if (!atom_needs_quotes(name)) {
    out += name;
    return;
  }
  out += '\'';
  for (unsigned char c : name) {
    if (c == '\'' || c == '\\') {
      out += '\\';
      out += static_cast<char>(c);
    } else if (c < 32 || c > 126) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", c);
      out += buf;
    } else {
      out += static_cast<char>(c);
    }
  }
  out += '\'';
}

void print_float(std::string& out, double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  std::string s(buf, p);
  auto epos = s.find_first_of("eE");
  if (s.find('.') == std::string::npos) {
    if (epos == std::string::npos) {
      s += ".0";
    } else {
      s.insert(epos, ".0");
    }
  }
  out += s;
}

bool printable_string_list(const List& l) {
  if (l.tail || l.elems.empty()) return false;
  for (const Term& e : l.elems) {
    if (!e.is_int()) return false;
    const BigInt& v = e.int_value();
    if (v < 32 || v > 126) return false;
  }
  return true;
}

void print_binary(std::string& out, const Binary& b) {
  out += "<<";
  std::uint64_t whole = b.bit_size / 8;
  for (std::uint64_t i = 0; i < whole; ++i) {
    if (i) out += ',';
    out += std::to_string(b.bytes[i]);
  }
  std::uint64_t rem = b.bit_size % 8;
  if (rem) {
    if (whole) out += ',';
    unsigned v = b.bytes[whole] >> (8 - rem);
    out += std::to_string(v);
    out += ':';
    out += std::to_string(rem);
  }
  out += ">>";
}

void print_term_rec(std::string& out, const Term& t) {
  switch (t.kind()) {
    case TermKind::AtomT:
      print_atom(out, t.atom_name());
      break;
    case TermKind::IntT:
      out += t.int_value().str();
      break;
    case TermKind::FloatT:
      print_float(out, t.float_value());
      break;
    case TermKind::BinaryT:
      print_binary(out, t.bin());
      break;
    case TermKind::TupleT: {
      out += '{';
      bool first = true;
      for (const Term& e : t.tuple_elems()) {
        if (!first) out += ',';
        first = false;
        print_term_rec(out, e);
      }
      out += '}';
      break;
    }
    case TermKind::ListT: {
      const List& l = t.list_parts();
      if (printable_string_list(l)) {
        out += '"';
        for (const Term& e : l.elems) {
          char c = static_cast<char>(e.int_value().convert_to<int>());
          if (c == '"' || c == '\\') out += '\\';
          out += c;
        }
        out += '"';
        break;
      }
      out += '[';
      bool first = true;
      for (const Term& e : l.elems) {
        if (!first) out += ',';
        first = false;
        print_term_rec(out, e);
      }
      if (l.tail) {
        out += '|';
        print_term_rec(out, *l.tail);
      }
      out += ']';
      break;
    }
  }
}

}  // namespace

bool atom_needs_quotes(std::string_view name) {
  if (name.empty()) return true;
  char c0 = name[0];
  if (!(c0 >= 'a' && c0 <= 'z')) return true;
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@'))
      return true;
  }
  for (std::string_view w : kReservedWords)
    if (w == name) return true;
  return false;
}

std::vector<Term> parse_forms(std::string_view text) {
  Parser p(text);
  return p.forms();
}

Term parse_form(std::string_view text) {
  std::vector<Term> fs = parse_forms(text);
  if (fs.size() != 1)
    throw ParseError("expected exactly one form", 1, 1);
  return std::move(fs.front());
}

std::string print_term(const Term& t) {
  std::string out;
  print_term_rec(out, t);
  return out;
}

std::string print_form(const Term& t) {
  std::string out = print_term(t);
  out += ".\n";
  return out;
}

}  // namespace beamobf
