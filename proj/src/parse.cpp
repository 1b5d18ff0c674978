#include "wnl/parse.hpp"

#include <cctype>
#include <sstream>

#include "json.hpp"

namespace wnl {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw EngineError(ErrCode::Parse, msg);
}

// Recursive-descent parser over the expression grammar.
struct ExprParser {
  const std::string& s;
  size_t pos = 0;
  int n;
  const SymbolTable* symbols;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  [[noreturn]] void error(const std::string& msg) {
    fail(msg + " at position " + std::to_string(pos) + " in \"" + s + "\"");
  }

  long integer() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
      ++pos;
    if (pos == start) error("expected an integer");
    return std::stol(s.substr(start, pos - start));
  }

  Expr sum() {
    Expr v = eat('-') ? -product() : product();
    for (;;) {
      if (eat('+'))
        v += product();
      else if (eat('-'))
        v -= product();
      else
        return v;
    }
  }

  Expr product() {
    Expr v = power();
    while (eat('*')) v *= power();
    return v;
  }

  Expr power() {
    Expr v = primary();
    if (eat('^')) {
      long e = integer();
      if (e < 0 || e > 64) error("exponent out of range");
      v = v.pow(int(e));
    }
    return v;
  }

  Expr primary() {
    char c = peek();
    if (c == '(') {
      ++pos;
      Expr v = sum();
      if (!eat(')')) error("missing ')'");
      return v;
    }
    if (c == '-') {
      ++pos;
      return -power();
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long num = integer();
      if (eat('/')) {
        long den = integer();
        if (den == 0) error("zero denominator");
        return Expr(Q(num) / Q(den));
      }
      return Expr(Q(num));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return identifier();
    error("unexpected character");
  }

  Expr identifier() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    std::string word = s.substr(start, pos - start);
    // field jets: u<k>, u<k>_x.., u<k>@order
    if (word.size() >= 2 && word[0] == 'u' &&
        std::isdigit(static_cast<unsigned char>(word[1]))) {
      size_t p = 1;
      while (p < word.size() &&
             std::isdigit(static_cast<unsigned char>(word[p])))
        ++p;
      int field = std::stoi(word.substr(1, p - 1)) - 1;
      if (field < 0 || field >= n) error("field index out of range in " + word);
      int order = 0;
      if (p < word.size()) {
        if (word[p] != '_') error("malformed jet variable " + word);
        for (++p; p < word.size(); ++p) {
          if (word[p] != 'x') error("malformed jet suffix in " + word);
          ++order;
        }
      } else {
        size_t save = pos;
        skip_ws();
        if (pos < s.size() && s[pos] == '@') {
          ++pos;
          long o = integer();
          if (o < 0 || o > 64) error("jet order out of range");
          order = int(o);
        } else {
          pos = save;
        }
      }
      return Expr::from(jet_factor(field, order));
    }
    // opaque symbol with optional indices and derivative suffixes
    std::vector<int> idxs;
    if (eat('[')) {
      do {
        long i = integer();
        if (i < 1 || i > n) error("symbol index out of range in " + word);
        idxs.push_back(int(i) - 1);
      } while (eat(','));
      if (!eat(']')) error("missing ']' after indices of " + word);
    }
    if (symbols) {
      auto it = symbols->find(word);
      if (it == symbols->end()) error("undeclared symbol " + word);
      if (it->second != int(idxs.size()))
        error("symbol " + word + " declared with arity " +
              std::to_string(it->second) + ", used with " +
              std::to_string(idxs.size()));
    }
    std::vector<int> ders;
    // derivative suffix: ",k" after the bracket (or bare name)
    while (true) {
      size_t save = pos;
      skip_ws();
      if (pos < s.size() && s[pos] == ',' && pos + 1 < s.size() &&
          std::isdigit(static_cast<unsigned char>(s[pos + 1]))) {
        ++pos;
        long k = integer();
        if (k < 1 || k > n) error("derivative index out of range on " + word);
        ders.push_back(int(k) - 1);
      } else {
        pos = save;
        break;
      }
    }
    return Expr::from(sym_factor(word, std::move(idxs), std::move(ders)));
  }
};

Expr parse_in(const std::string& text, int n, const SymbolTable* symbols) {
  ExprParser p{text, 0, n, symbols};
  Expr v = p.sum();
  p.skip_ws();
  if (p.pos != text.size()) p.error("trailing input");
  return v;
}

int get_index(const json& j, const char* field, int n, const char* where) {
  if (!j.contains(field) || !j[field].is_number_integer())
    fail(std::string(where) + ": missing integer field '" + field + "'");
  int v = j[field].get<int>();
  if (v < 1 || v > n)
    fail(std::string(where) + ": index '" + field + "' = " +
         std::to_string(v) + " out of range 1.." + std::to_string(n));
  return v - 1;
}

Q parse_rational(const std::string& text) {
  ExprParser p{text, 0, 1, nullptr};
  bool neg = p.eat('-');
  long num = p.integer();
  long den = 1;
  if (p.eat('/')) den = p.integer();
  p.skip_ws();
  if (p.pos != text.size() || den == 0) fail("bad rational literal " + text);
  Q q = Q(num) / Q(den);
  return neg ? Q(-q) : q;
}

std::string expect_string(const json& j, const char* where) {
  if (!j.is_string()) fail(std::string(where) + ": expected a string");
  return j.get<std::string>();
}

} // namespace

Expr parse_expr(const std::string& text, int n, const SymbolTable* symbols) {
  return parse_in(text, n, symbols);
}

ParsedOperator parse_operator(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("operator document must be a JSON object");
  ParsedOperator out;
  if (!doc.contains("n") || !doc["n"].is_number_integer())
    fail("missing integer field 'n'");
  out.n = doc["n"].get<int>();
  if (out.n < 1 || out.n > 16) fail("'n' out of range 1..16");
  out.op.n = out.n;

  bool symbolic = true;
  if (doc.contains("mode")) {
    std::string mode = expect_string(doc["mode"], "mode");
    if (mode == "explicit")
      symbolic = false;
    else if (mode != "symbolic")
      fail("mode must be \"symbolic\" or \"explicit\"");
  }
  if (doc.contains("symbols")) {
    if (!doc["symbols"].is_array()) fail("'symbols' must be an array");
    for (const auto& s : doc["symbols"]) {
      std::string name = expect_string(s.at("name"), "symbols[].name");
      int arity = s.value("arity", 0);
      if (name.empty() || arity < 0 || arity > 4)
        fail("bad symbol declaration " + name);
      out.symbols[name] = arity;
    }
  }
  // symbolic mode without declarations: allow anything
  const SymbolTable* table =
      (!symbolic || !out.symbols.empty()) ? &out.symbols : nullptr;

  auto expr_at = [&](const json& j, const std::string& where) {
    return parse_in(expect_string(j, where.c_str()), out.n, table);
  };

  if (doc.contains("pbht")) {
    const json& pb = doc["pbht"];
    if (!pb.is_object()) fail("'pbht' must be an object");
    PBHTData d;
    d.n = out.n;
    size_t n = size_t(out.n);
    d.g.assign(n, std::vector<Expr>(n));
    d.Gamma.assign(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));
    // each entry is either an opaque symbol name or an explicit matrix
    auto matrix2 = [&](const json& j, const std::string& name,
                       std::vector<std::vector<Expr>>& m) {
      if (j.is_string()) {
        std::string sym = j.get<std::string>();
        for (size_t i = 0; i < n; ++i)
          for (size_t k = 0; k < n; ++k)
            m[i][k] = Expr::from(sym_factor(sym, {int(i), int(k)}));
        return;
      }
      if (!j.is_array() || j.size() != n) fail("pbht." + name + ": expected " +
                                               std::to_string(n) + " rows");
      for (size_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != n)
          fail("pbht." + name + ": row " + std::to_string(i + 1) +
               " has wrong length");
        for (size_t k = 0; k < n; ++k)
          m[i][k] = expr_at(j[i][k], "pbht." + name);
      }
    };
    matrix2(pb.at("g"), "g", d.g);
    const json& ga = pb.at("Gamma");
    if (ga.is_string()) {
      std::string sym = ga.get<std::string>();
      for (size_t i = 0; i < n; ++i)
        for (size_t j2 = 0; j2 < n; ++j2)
          for (size_t k = 0; k < n; ++k)
            d.Gamma[i][j2][k] =
                Expr::from(sym_factor(sym, {int(i), int(j2), int(k)}));
    } else {
      if (!ga.is_array() || ga.size() != n) fail("pbht.Gamma: expected cube");
      for (size_t i = 0; i < n; ++i) {
        if (!ga[i].is_array() || ga[i].size() != n)
          fail("pbht.Gamma: bad shape");
        for (size_t j2 = 0; j2 < n; ++j2) {
          if (!ga[i][j2].is_array() || ga[i][j2].size() != n)
            fail("pbht.Gamma: bad shape");
          for (size_t k = 0; k < n; ++k)
            d.Gamma[i][j2][k] = expr_at(ga[i][j2][k], "pbht.Gamma");
        }
      }
    }
    if (pb.contains("w")) {
      const json& w = pb["w"];
      auto one_tail = [&](const json& jw, const Q& e) {
        TailAffinor t;
        t.e = e;
        t.w.assign(n, std::vector<Expr>(n));
        matrix2(jw, "w", t.w);
        d.tails.push_back(std::move(t));
      };
      if (w.is_array() && !w.empty() && w[0].is_object()) {
        for (const auto& tw : w)
          one_tail(tw.at("w"),
                   tw.contains("e")
                       ? parse_rational(expect_string(tw["e"], "pbht.w[].e"))
                       : Q(1));
      } else {
        one_tail(w, Q(1));
      }
    }
    out.has_pbht = true;
    out.pbht = d;
    out.op = pbht_operator(d);
    return out;
  }

  if (doc.contains("local")) {
    if (!doc["local"].is_array()) fail("'local' must be an array");
    for (const auto& e : doc["local"]) {
      int i = get_index(e, "i", out.n, "local[]");
      int j = get_index(e, "j", out.n, "local[]");
      if (!e.contains("sigma") || !e["sigma"].is_number_integer())
        fail("local[]: missing integer field 'sigma'");
      int sigma = e["sigma"].get<int>();
      if (sigma < 0)
        fail("local[]: sigma must be >= 0 (nonlocality goes in 'tails')");
      if (sigma > 16) fail("local[]: sigma out of range");
      Expr c = expr_at(e.at("coeff"), "local[].coeff");
      out.op.set_coeff(i, j, sigma, out.op.coeff(i, j, sigma) + c);
    }
  }
  if (doc.contains("tails")) {
    if (!doc["tails"].is_array()) fail("'tails' must be an array");
    for (const auto& t : doc["tails"]) {
      TailTerm tt;
      tt.e = t.contains("e")
                 ? parse_rational(expect_string(t["e"], "tails[].e"))
                 : Q(1);
      if (!t.contains("w") || !t["w"].is_array() ||
          t["w"].size() != size_t(out.n))
        fail("tails[]: 'w' must list " + std::to_string(out.n) +
             " components");
      for (const auto& wj : t["w"])
        tt.w.push_back(expr_at(wj, "tails[].w"));
      out.op.tails.push_back(std::move(tt));
    }
  }
  if (out.op.B.empty() && out.op.tails.empty())
    fail("operator document declares no coefficients");
  return out;
}

std::string serialize_operator(const WNLOperator& P, const Ctx& ctx) {
  json doc;
  doc["version"] = 1;
  doc["n"] = P.n;
  json local = json::array();
  for (const auto& [key, v] : P.B) {
    auto [i, j, sigma] = key;
    local.push_back({{"i", i + 1},
                     {"j", j + 1},
                     {"sigma", sigma},
                     {"coeff", to_string(v, &ctx)}});
  }
  doc["local"] = std::move(local);
  json tails = json::array();
  for (const auto& t : P.tails) {
    json w = json::array();
    for (const auto& wi : t.w) w.push_back(to_string(wi, &ctx));
    tails.push_back({{"e", to_string(t.e)}, {"w", std::move(w)}});
  }
  doc["tails"] = std::move(tails);
  return doc.dump(2);
}

} // namespace wnl
