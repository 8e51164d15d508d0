#include "defgeo/parse.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <optional>

#include "defgeo/errors.hpp"

namespace defgeo {

namespace {

enum class Tok {
  ident,     // bare identifier (not of variable shape)
  variable,  // x<digits>
  number,
  lbrace, rbrace, lparen, rparen, lbracket, rbracket,
  semicolon, comma, slash, equals, tilde,
  and_op, or_op,
  end,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  long value = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, current_.line, current_.col);
  }

private:
  void advance() {
    skip_space();
    current_.line = line_;
    current_.col = col_;
    if (pos_ >= src_.size()) {
      current_.kind = Tok::end;
      current_.text.clear();
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) step();
      current_.kind = Tok::number;
      current_.text = std::string(src_.substr(start, pos_ - start));
      current_.value = std::strtol(current_.text.c_str(), nullptr, 10);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        step();
      }
      current_.text = std::string(src_.substr(start, pos_ - start));
      if (current_.text.size() > 1 && current_.text[0] == 'x' &&
          std::all_of(current_.text.begin() + 1, current_.text.end(),
                      [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
        current_.kind = Tok::variable;
        current_.value = std::strtol(current_.text.c_str() + 1, nullptr, 10);
      } else {
        current_.kind = Tok::ident;
      }
      return;
    }
    switch (c) {
      case '{': single(Tok::lbrace); return;
      case '}': single(Tok::rbrace); return;
      case '(': single(Tok::lparen); return;
      case ')': single(Tok::rparen); return;
      case '[': single(Tok::lbracket); return;
      case ']': single(Tok::rbracket); return;
      case ';': single(Tok::semicolon); return;
      case ',': single(Tok::comma); return;
      case '=': single(Tok::equals); return;
      case '~': single(Tok::tilde); return;
      case '/':
        step();
        if (pos_ < src_.size() && src_[pos_] == '\\') {
          step();
          current_.kind = Tok::and_op;
          current_.text = "/\\";
        } else {
          current_.kind = Tok::slash;
          current_.text = "/";
        }
        return;
      case '\\':
        step();
        if (pos_ < src_.size() && src_[pos_] == '/') {
          step();
          current_.kind = Tok::or_op;
          current_.text = "\\/";
          return;
        }
        throw ParseError("stray '\\'", line_, col_);
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }
  }

  void single(Tok kind) {
    current_.kind = kind;
    current_.text = std::string(1, src_[pos_]);
    step();
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') step();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        step();
      } else {
        break;
      }
    }
  }

  void step() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token current_;
};

Token expect(Lexer& lex, Tok kind, const char* what) {
  if (lex.peek().kind != kind) {
    lex.fail(std::string("expected ") + what + ", got '" + lex.peek().text + "'");
  }
  return lex.take();
}

void expect_keyword(Lexer& lex, const char* kw) {
  if (lex.peek().kind != Tok::ident || lex.peek().text != kw) {
    lex.fail(std::string("expected '") + kw + "', got '" + lex.peek().text + "'");
  }
  lex.take();
}

long expect_number(Lexer& lex, const char* what) {
  return expect(lex, Tok::number, what).value;
}

// ---------------------------------------------------------------------------
// structure files

std::vector<Elem> parse_int_list(Lexer& lex, int k) {
  std::vector<Elem> out;
  expect(lex, Tok::lbracket, "'['");
  while (true) {
    Token t = expect(lex, Tok::number, "table entry");
    if (t.value < 0 || t.value >= k) {
      throw ParseError("table entry " + std::to_string(t.value) + " out of range for universe " +
                           std::to_string(k),
                       t.line, t.col);
    }
    out.push_back(static_cast<Elem>(t.value));
    if (lex.peek().kind == Tok::comma) {
      lex.take();
      continue;
    }
    break;
  }
  expect(lex, Tok::rbracket, "']'");
  return out;
}

std::vector<Elem> parse_tuple(Lexer& lex, int k) {
  std::vector<Elem> out;
  expect(lex, Tok::lparen, "'('");
  while (true) {
    Token t = expect(lex, Tok::number, "tuple entry");
    if (t.value < 0 || t.value >= k) {
      throw ParseError("tuple entry " + std::to_string(t.value) + " out of range for universe " +
                           std::to_string(k),
                       t.line, t.col);
    }
    out.push_back(static_cast<Elem>(t.value));
    if (lex.peek().kind == Tok::comma) {
      lex.take();
      continue;
    }
    break;
  }
  expect(lex, Tok::rparen, "')'");
  return out;
}

}  // namespace

Structure parse_structure(std::string_view text) {
  Lexer lex(text);
  expect_keyword(lex, "structure");
  Token name = expect(lex, Tok::ident, "structure name");
  expect(lex, Tok::lbrace, "'{'");

  std::optional<int> k;
  std::vector<OpTable> ops;
  std::vector<RelTable> rels;

  while (lex.peek().kind != Tok::rbrace) {
    Token head = expect(lex, Tok::ident, "declaration");
    if (head.text == "universe") {
      if (k.has_value()) throw ParseError("duplicate universe declaration", head.line, head.col);
      Token size = expect(lex, Tok::number, "universe size");
      if (size.value < 1) throw ParseError("universe size must be >= 1", size.line, size.col);
      k = static_cast<int>(size.value);
      expect(lex, Tok::semicolon, "';'");
      continue;
    }
    if (!k.has_value()) {
      throw ParseError("universe must be declared before operations and relations", head.line,
                       head.col);
    }
    if (head.text == "op") {
      Token sym = expect(lex, Tok::ident, "operation name");
      expect(lex, Tok::slash, "'/'");
      Token arity = expect(lex, Tok::number, "operation arity");
      if (arity.value < 0) throw ParseError("operation arity must be >= 0", arity.line, arity.col);
      expect(lex, Tok::equals, "'='");
      std::vector<Elem> table = parse_int_list(lex, *k);
      expect(lex, Tok::semicolon, "';'");
      std::uint64_t want =
          pow_u64(static_cast<std::uint64_t>(*k), static_cast<unsigned>(arity.value));
      if (table.size() != want) {
        throw ParseError("operation '" + sym.text + "' table length " +
                             std::to_string(table.size()) + " != " + std::to_string(want),
                         sym.line, sym.col);
      }
      ops.push_back(OpTable{sym.text, static_cast<int>(arity.value), std::move(table)});
      continue;
    }
    if (head.text == "rel") {
      Token sym = expect(lex, Tok::ident, "relation name");
      expect(lex, Tok::slash, "'/'");
      Token arity = expect(lex, Tok::number, "relation arity");
      if (arity.value < 1) throw ParseError("relation arity must be >= 1", arity.line, arity.col);
      expect(lex, Tok::equals, "'='");
      expect(lex, Tok::lbrace, "'{'");
      std::vector<std::vector<Elem>> tuples;
      if (lex.peek().kind != Tok::rbrace) {
        while (true) {
          Token at = lex.peek();
          std::vector<Elem> tuple = parse_tuple(lex, *k);
          if (static_cast<long>(tuple.size()) != arity.value) {
            throw ParseError("tuple length " + std::to_string(tuple.size()) +
                                 " != declared arity " + std::to_string(arity.value),
                             at.line, at.col);
          }
          tuples.push_back(std::move(tuple));
          if (lex.peek().kind == Tok::comma) {
            lex.take();
            continue;
          }
          break;
        }
      }
      expect(lex, Tok::rbrace, "'}'");
      expect(lex, Tok::semicolon, "';'");
      rels.push_back(RelTable{sym.text, static_cast<int>(arity.value), std::move(tuples), {}});
      continue;
    }
    throw ParseError("unknown declaration '" + head.text + "'", head.line, head.col);
  }
  expect(lex, Tok::rbrace, "'}'");
  if (lex.peek().kind != Tok::end) lex.fail("trailing input after structure");
  if (!k.has_value()) throw ParseError("missing universe declaration", name.line, name.col);

  try {
    return Structure(name.text, Universe{*k}, std::move(ops), std::move(rels));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), name.line, name.col);
  }
}

// ---------------------------------------------------------------------------
// formulas

namespace {

class FormulaParser {
public:
  FormulaParser(Lexer& lex, const Structure& ctx) : lex_(lex), ctx_(ctx) {}

  Formula parse() { return formula(); }

private:
  // formula := or_expr, where a quantifier encountered at operand position
  // swallows everything to the end of the enclosing group.
  Formula formula() { return or_expr(); }

  Formula or_expr() {
    std::vector<Formula> parts;
    parts.push_back(and_expr());
    while (lex_.peek().kind == Tok::or_op) {
      lex_.take();
      parts.push_back(and_expr());
    }
    return parts.size() == 1 ? std::move(parts[0]) : Formula::disj(std::move(parts));
  }

  Formula and_expr() {
    std::vector<Formula> parts;
    parts.push_back(not_expr());
    while (lex_.peek().kind == Tok::and_op) {
      lex_.take();
      parts.push_back(not_expr());
    }
    return parts.size() == 1 ? std::move(parts[0]) : Formula::conj(std::move(parts));
  }

  Formula not_expr() {
    if (lex_.peek().kind == Tok::tilde) {
      lex_.take();
      return Formula::negation(not_expr());
    }
    if (lex_.peek().kind == Tok::ident &&
        (lex_.peek().text == "exists" || lex_.peek().text == "forall")) {
      Token q = lex_.take();
      Token v = expect(lex_, Tok::variable, "quantified variable");
      if (v.value < 1) throw ParseError("variable index must be >= 1", v.line, v.col);
      Formula body = formula();  // scope runs to the end of the group
      return q.text == "exists" ? Formula::exists(static_cast<int>(v.value), std::move(body))
                                : Formula::forall(static_cast<int>(v.value), std::move(body));
    }
    return primary();
  }

  Formula primary() {
    if (lex_.peek().kind == Tok::lparen) {
      lex_.take();
      Formula inner = formula();
      expect(lex_, Tok::rparen, "')'");
      return inner;
    }
    return atom();
  }

  Formula atom() {
    if (lex_.peek().kind == Tok::ident) {
      Token sym = lex_.peek();
      if (const RelTable* rel = ctx_.find_rel(sym.text)) {
        lex_.take();
        std::vector<Term> args = argument_list();
        if (static_cast<int>(args.size()) != rel->arity) {
          throw ParseError("relation '" + sym.text + "' expects " + std::to_string(rel->arity) +
                               " arguments, got " + std::to_string(args.size()),
                           sym.line, sym.col);
        }
        return Formula::atom(sym.text, std::move(args));
      }
    }
    Term lhs = term();
    expect(lex_, Tok::equals, "'='");
    Term rhs = term();
    return Formula::equals(std::move(lhs), std::move(rhs));
  }

  Term term() {
    Token t = lex_.peek();
    if (t.kind == Tok::variable) {
      lex_.take();
      if (t.value < 1) throw ParseError("variable index must be >= 1", t.line, t.col);
      return Term::variable(static_cast<int>(t.value));
    }
    if (t.kind == Tok::ident) {
      const OpTable* op = ctx_.find_op(t.text);
      if (op == nullptr) {
        if (ctx_.find_rel(t.text) != nullptr) {
          throw ParseError("relation symbol '" + t.text + "' used in term position", t.line, t.col);
        }
        throw ParseError("unknown symbol '" + t.text + "'", t.line, t.col);
      }
      lex_.take();
      std::vector<Term> args = argument_list();
      if (static_cast<int>(args.size()) != op->arity) {
        throw ParseError("operation '" + t.text + "' expects " + std::to_string(op->arity) +
                             " arguments, got " + std::to_string(args.size()),
                         t.line, t.col);
      }
      return Term::apply(t.text, std::move(args));
    }
    throw ParseError("expected a term, got '" + t.text + "'", t.line, t.col);
  }

  std::vector<Term> argument_list() {
    expect(lex_, Tok::lparen, "'('");
    std::vector<Term> args;
    if (lex_.peek().kind != Tok::rparen) {
      args.push_back(term());
      while (lex_.peek().kind == Tok::comma) {
        lex_.take();
        args.push_back(term());
      }
    }
    expect(lex_, Tok::rparen, "')'");
    return args;
  }

  Lexer& lex_;
  const Structure& ctx_;
};

}  // namespace

Formula parse_formula(std::string_view text, const Structure& ctx) {
  Lexer lex(text);
  FormulaParser parser(lex, ctx);
  Formula out = parser.parse();
  if (lex.peek().kind != Tok::end) lex.fail("trailing input after formula");
  return out;
}

// ---------------------------------------------------------------------------
// spec files

FormulaClassSpec parse_spec(std::string_view text, const Structure& ctx) {
  FormulaClassSpec spec;
  bool have_mode = false;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) continue;
    std::size_t end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);

    if (!have_mode) {
      if (!line.starts_with("mode:")) {
        throw ParseError("spec must start with a 'mode: lattice|boolean' header", line_no, 1);
      }
      std::string_view value = line.substr(5);
      std::size_t vb = value.find_first_not_of(" \t");
      value = vb == std::string_view::npos ? std::string_view{} : value.substr(vb);
      if (value == "lattice") {
        spec.mode = ClosureMode::lattice;
      } else if (value == "boolean") {
        spec.mode = ClosureMode::boolean;
      } else {
        throw ParseError("unknown mode '" + std::string(value) + "'", line_no, 1);
      }
      have_mode = true;
      continue;
    }
    try {
      spec.generators.push_back(parse_formula(line, ctx));
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()) + " [spec line " + std::to_string(line_no) + "]",
                       line_no, e.column());
    }
  }
  if (!have_mode) throw ParseError("empty spec: missing mode header", 1, 1);
  if (spec.generators.empty()) throw ParseError("spec has no generator formulas", line_no, 1);
  return spec;
}

std::string to_text(const FormulaClassSpec& spec) {
  std::string out = spec.mode == ClosureMode::lattice ? "mode: lattice\n" : "mode: boolean\n";
  for (const Formula& g : spec.generators) {
    out += to_text(g);
    out += '\n';
  }
  return out;
}

}  // namespace defgeo
