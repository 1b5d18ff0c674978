#pragma once

#include <map>
#include <string>

#include "wnl/geometry.hpp"
#include "wnl/wnlop.hpp"

namespace wnl {

/// Declared opaque symbols: name -> arity (number of bracket indices).
using SymbolTable = std::map<std::string, int>;

/// Parses the expression grammar: rational literals, field jets `u1`, `u2_x`,
/// `u1@4`, opaque symbols `g[1,2]` with derivative suffixes `g[1,2],1`,
/// operators `+ - * ^` with integer powers and parentheses.  Whitespace
/// insensitive.  Unknown symbols raise Parse unless `symbols` is null
/// (symbolic mode, anything goes); out-of-range indices always raise Parse.
Expr parse_expr(const std::string& text, int n,
                const SymbolTable* symbols = nullptr);

/// Fully parsed operator declaration.
struct ParsedOperator {
  int n = 1;
  WNLOperator op;
  SymbolTable symbols;
  bool has_pbht = false; // set when the document used the pbht shorthand
  PBHTData pbht;
};

/// Parses a JSON operator document:
///   {"n": 2,
///    "mode": "symbolic" | "explicit",
///    "symbols": [{"name": "g", "arity": 2}, ...],
///    "local": [{"i": 1, "j": 1, "sigma": 1, "coeff": "u1_x"}, ...],
///    "tails": [{"e": "1", "w": ["u1_x", "u2_x"]}, ...],
///    "pbht": {"g": ..., "Gamma": ..., "w": ...}}
/// The pbht shorthand accepts either an opaque symbol name (string) or
/// explicit matrices of expression strings; it expands to the hydrodynamic
/// operator g^{ij} dx + Gamma^{ij}_k u^k_x + sum_a e_a w^i u^k_x dx^{-1} ...
/// Indices are 1-based in documents. Throws EngineError(Parse) on bad input.
ParsedOperator parse_operator(const std::string& json_text);

/// Serializes an operator back to the document schema; parse(serialize(P))
/// round-trips to an identical operator.
std::string serialize_operator(const WNLOperator& P, const Ctx& ctx);

} // namespace wnl
