#pragma once

#include <string>
#include <string_view>

#include "defgeo/structure.hpp"

namespace defgeo {

// Structure file grammar:
//   file  := "structure" IDENT "{" decl* "}"
//   decl  := "universe" INT ";"
//          | "op" IDENT "/" INT "=" "[" INT ("," INT)* "]" ";"
//          | "rel" IDENT "/" INT "=" "{" tuple ("," tuple)* "}" ";"
//          | "rel" IDENT "/" INT "=" "{" "}" ";"
//   tuple := "(" INT ("," INT)* ")"
// The universe declaration must come first.  '#' starts a comment to the end
// of the line.  Operation tables are row-major with argument 1 most
// significant.  Throws ParseError with line/column on malformed input and on
// semantic errors (table length, out-of-range entries, duplicate symbols).
Structure parse_structure(std::string_view text);

// Formula grammar (ASCII):
//   var     := "x" INT                         (indices >= 1)
//   term    := var | IDENT "(" term,* ")"
//   atom    := term "=" term | IDENT "(" term,* ")"
//   formula := atom | "~" formula | formula "/\" formula | formula "\/" formula
//            | ("exists"|"forall") var formula | "(" formula ")"
// Precedence ~ > /\ > \/; a quantifier's scope extends to the end of the
// enclosing group.  Symbols resolve against `ctx`.
Formula parse_formula(std::string_view text, const Structure& ctx);

// Spec file: a "mode: lattice|boolean" header line followed by one generator
// formula per line.  Blank lines and '#' comments are ignored.
FormulaClassSpec parse_spec(std::string_view text, const Structure& ctx);

std::string to_text(const FormulaClassSpec& spec);

}  // namespace defgeo
