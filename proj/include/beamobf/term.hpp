#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace beamobf {

using BigInt = boost::multiprecision::cpp_int;

class Term;
using TermVec = std::vector<Term>;

/// Erlang atom.
struct Atom {
  std::string name;
};

/// Binary or bit-string payload. Bits are stored MSB-first; a trailing
/// partial byte keeps its bits in the high positions of the last byte.
struct Binary {
  std::vector<std::uint8_t> bytes;
  std::uint64_t bit_size = 0;

  bool whole_bytes() const { return bit_size % 8 == 0; }
};

struct Tuple {
  TermVec elems;
};

/// List cells. A null tail means the list is proper (ends in nil).
/// Strings are not a distinct case: "abc" parses to a proper list of
/// small integers, and the printer re-emits printable byte lists in
/// string notation.
struct List {
  TermVec elems;
  std::shared_ptr<const Term> tail;
};

enum class TermKind { AtomT, IntT, FloatT, BinaryT, TupleT, ListT };

/// One parsed Erlang term as used by textual BEAM assembly (.S) files.
/// Value semantics; source position is carried for diagnostics but is
/// not part of the term's identity.
class Term {
public:
  Term() : value_(List{}) {}  // nil

  static Term atom(std::string name);
  static Term integer(BigInt v);
  static Term integer(long long v) { return integer(BigInt(v)); }
  static Term real(double v);
  static Term binary(std::vector<std::uint8_t> bytes, std::uint64_t bit_size);
  static Term binary(std::vector<std::uint8_t> bytes);
  static Term tuple(TermVec elems);
  static Term list(TermVec elems);
  static Term list(TermVec elems, Term tail);
  static Term charlist(std::string_view chars);
  static Term nil() { return Term(); }

  TermKind kind() const { return static_cast<TermKind>(value_.index()); }

  bool is_atom() const { return kind() == TermKind::AtomT; }
  bool is_atom(std::string_view name) const {
    return is_atom() && atom_name() == name;
  }
  bool is_int() const { return kind() == TermKind::IntT; }
  bool is_float() const { return kind() == TermKind::FloatT; }
  bool is_binary() const { return kind() == TermKind::BinaryT; }
  bool is_tuple() const { return kind() == TermKind::TupleT; }
  bool is_list() const { return kind() == TermKind::ListT; }
  bool is_nil() const {
    return is_list() && list_parts().elems.empty() && !list_parts().tail;
  }

  const std::string& atom_name() const { return std::get<Atom>(value_).name; }
  const BigInt& int_value() const { return std::get<BigInt>(value_); }
  double float_value() const { return std::get<double>(value_); }
  const Binary& bin() const { return std::get<Binary>(value_); }
  const TermVec& tuple_elems() const { return std::get<Tuple>(value_).elems; }
  const List& list_parts() const { return std::get<List>(value_); }

  bool is_proper_list() const {
    return is_list() && !list_parts().tail;
  }
  /// Proper list whose elements are all integers in [0, 255].
  bool is_byte_list() const;
  /// Small-integer accessor for terms known to hold machine-size values.
  long long small_int() const;

  std::size_t line = 0;
  std::size_t col = 0;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

private:
  std::variant<Atom, BigInt, double, Binary, Tuple, List> value_;
};

/// Parse error with source position.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t line, std::size_t col)
      : std::runtime_error(what), line(line), col(col) {}
  std::size_t line;
  std::size_t col;
};

/// Maximum term nesting depth accepted by the reader.
inline constexpr std::size_t kMaxTermDepth = 10000;

/// Parses a sequence of dot-terminated forms. Line comments starting
/// with % are skipped. Throws ParseError with line/column on bad input.
std::vector<Term> parse_forms(std::string_view text);

/// Parses exactly one dot-terminated form.
Term parse_form(std::string_view text);

/// Canonical text for one term, without the form terminator.
std::string print_term(const Term& t);

/// Canonical single-form text ending in ".\n".
std::string print_form(const Term& t);

/// True if the atom name needs single quotes in Erlang syntax.
bool atom_needs_quotes(std::string_view name);

}  // namespace beamobf
