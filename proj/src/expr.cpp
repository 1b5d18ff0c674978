#include "wnl/expr.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace wnl {

Factor jet_factor(int field, int order, Point pt) {
  Factor g;
  g.kind = Factor::Kind::Jet;
  g.pt = pt;
  g.a = field;
  g.b = order;
  return g;
}

Factor sym_factor(std::string name, std::vector<int> idxs, std::vector<int> ders,
                  Point pt) {
  Factor g;
  g.kind = Factor::Kind::Sym;
  g.pt = pt;
  g.name = std::move(name);
  g.idxs = std::move(idxs);
  std::sort(ders.begin(), ders.end());
  g.ders = std::move(ders);
  return g;
}

Factor psi_factor(int arg, int comp, int order) {
  Factor g;
  g.kind = Factor::Kind::Psi;
  g.a = arg;
  g.b = comp;
  g.c = order;
  return g;
}

Factor atom_factor(int id) {
  Factor g;
  g.kind = Factor::Kind::Atom;
  g.a = id;
  return g;
}

Factor mark_factor(int arg, Point pt, int order) {
  Factor g;
  g.kind = Factor::Kind::Mark;
  g.pt = pt;
  g.a = arg;
  g.b = order;
  return g;
}

int Monomial::total_degree() const {
  int d = 0;
  for (auto& [g, e] : f) d += e;
  return d;
}

Monomial Monomial::times(const Factor& g, int e) const {
  Monomial r = *this;
  auto it = std::lower_bound(r.f.begin(), r.f.end(), g,
                             [](auto& p, const Factor& x) { return p.first < x; });
  if (it != r.f.end() && it->first == g)
    it->second += e;
  else
    r.f.insert(it, {g, e});
  return r;
}

Monomial Monomial::times(const Monomial& m) const {
  Monomial r = *this;
  for (auto& [g, e] : m.f) r = r.times(g, e);
  return r;
}

Monomial Monomial::without(const Factor& g, int e) const {
  Monomial r = *this;
  for (auto it = r.f.begin(); it != r.f.end(); ++it) {
    if (it->first == g) {
      if (it->second < e) throw std::logic_error("Monomial::without underflow");
      it->second -= e;
      if (it->second == 0) r.f.erase(it);
      return r;
    }
  }
  throw std::logic_error("Monomial::without: factor not present");
}

bool Monomial::contains(const Factor& g) const { return exponent(g) > 0; }

int Monomial::exponent(const Factor& g) const {
  for (auto& [h, e] : f)
    if (h == g) return e;
  return 0;
}

bool Monomial::divisible_by(const Monomial& m) const {
  for (auto& [g, e] : m.f)
    if (exponent(g) < e) return false;
  return true;
}

Monomial Monomial::divided_by(const Monomial& m) const {
  Monomial r = *this;
  for (auto& [g, e] : m.f) r = r.without(g, e);
  return r;
}

Expr Expr::from(const Factor& g, const Q& c) {
  Monomial m;
  m.f.push_back({g, 1});
  return from(m, c);
}

Expr Expr::from(const Monomial& m, const Q& c) {
  Expr e;
  if (c != 0) e.t[m] = c;
  return e;
}

void Expr::add_term(const Monomial& m, const Q& c) {
  if (c == 0) return;
  auto [it, inserted] = t.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) t.erase(it);
  }
}

Expr Expr::operator-() const {
  Expr r = *this;
  for (auto& [m, c] : r.t) c = -c;
  return r;
}

Expr& Expr::operator+=(const Expr& o) {
  for (auto& [m, c] : o.t) add_term(m, c);
  return *this;
}

Expr& Expr::operator-=(const Expr& o) {
  for (auto& [m, c] : o.t) add_term(m, -c);
  return *this;
}

Expr operator*(const Expr& a, const Expr& b) {
  Expr r;
  for (auto& [ma, ca] : a.t)
    for (auto& [mb, cb] : b.t) r.add_term(ma.times(mb), ca * cb);
  return r;
}

Expr& Expr::operator*=(const Q& c) {
  if (c == 0) {
    t.clear();
    return *this;
  }
  for (auto& [m, k] : t) k *= c;
  return *this;
}

Expr Expr::pow(int e) const {
  Expr r(Q(1));
  for (int i = 0; i < e; ++i) r = r * (*this);
  return r;
}

bool operator<(const Expr& a, const Expr& b) {
  auto ia = a.t.begin(), ib = b.t.begin();
  for (; ia != a.t.end() && ib != b.t.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first;
    int c = cmp(ia->second, ib->second);
    if (c != 0) return c < 0;
  }
  return ia == a.t.end() && ib != b.t.end();
}

int AtomTable::intern(const Expr& payload, int arg, int tail) {
  auto it = index.find(payload);
  if (it != index.end()) return it->second;
  int id = int(infos.size());
  infos.push_back(AtomInfo{payload, arg, tail});
  index.emplace(payload, id);
  return id;
}

std::string to_string(const Q& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

std::string to_string(const Factor& g, const Ctx* ctx) {
  std::ostringstream os;
  auto pt_suffix = [&](Point p) { return p == Point::X ? std::string() : std::string("(") + point_name(p) + ")"; };
  switch (g.kind) {
  case Factor::Kind::Jet: {
    os << "u" << g.a + 1;
    if (g.b > 0 && g.b <= 3)
      os << "_" << std::string(size_t(g.b), 'x');
    else if (g.b > 3)
      os << "@" << g.b;
    os << pt_suffix(g.pt);
    break;
  }
  case Factor::Kind::Sym: {
    os << g.name;
    if (!g.idxs.empty()) {
      os << "[";
      for (size_t i = 0; i < g.idxs.size(); ++i)
        os << (i ? "," : "") << g.idxs[i] + 1;
      os << "]";
    }
    for (int d : g.ders) os << "," << d + 1;
    os << pt_suffix(g.pt);
    break;
  }
  case Factor::Kind::Psi: {
    os << "psi" << g.a + 1 << "_" << g.b + 1;
    if (g.c > 0) os << "@" << g.c;
    break;
  }
  case Factor::Kind::Atom: {
    if (ctx) {
      const AtomInfo& ai = ctx->atoms.info(g.a);
      if (ai.arg >= 0) {
        os << "nl" << ai.arg + 1 << "_t" << ai.tail + 1;
        break;
      }
      os << "Dinv{" << to_string(ai.payload, ctx) << "}";
      break;
    }
    os << "Dinv#" << g.a;
    break;
  }
  case Factor::Kind::Mark:
    os << "mk" << g.a + 1 << "@" << g.b << "(" << point_name(g.pt) << ")";
    break;
  }
  return os.str();
}

std::string to_string(const Monomial& m, const Ctx* ctx) {
  if (m.is_one()) return "1";
  std::ostringstream os;
  bool first = true;
  for (auto& [g, e] : m.f) {
    if (!first) os << "*";
    first = false;
    os << to_string(g, ctx);
    if (e > 1) os << "^" << e;
  }
  return os.str();
}

std::string to_string(const Expr& e, const Ctx* ctx) {
  if (e.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [m, c] : e.t) {
    Q a = c;
    if (first) {
      if (a < 0) {
        os << "-";
        a = -a;
      }
    } else {
      os << (a < 0 ? " - " : " + ");
      if (a < 0) a = -a;
    }
    first = false;
    if (m.is_one())
      os << to_string(a);
    else if (a == 1)
      os << to_string(m, ctx);
    else
      os << to_string(a) << "*" << to_string(m, ctx);
  }
  return os.str();
}

} // namespace wnl

wnl::Expr wnl::move_point(const Expr& e, Point from, Point to) {
  using namespace wnl;
  Expr r;
  for (auto& [m, q] : e.t) {
    Monomial h;
    for (auto& [f, ex] : m.f) {
      Factor g = f;
      if (g.pt == from) g.pt = to;
      h = h.times(g, ex);
    }
    r += Expr::from(h, q);
  }
  return r;
}
