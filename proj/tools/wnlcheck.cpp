// wnlcheck: batch front-end for the weakly nonlocal Poisson bracket engine.
//
// Commands:
//   skew        <op.json>   residuals of P + P*
//   jacobi      <op.json>   Jacobi identity residuals (--backend=op|dist|pva|all)
//   conditions  <op.json>   geometric (Gauss-Codazzi) conditions, PBHT only
//   compare     <op.json>   run every backend and cross-check the verdicts
//   adjoint     <op.json>   serialize P*
//
// Exit codes: 0 pass/empty residuals, 1 nonzero residuals, 2 usage or parse
// error, 3 internal invariant violation.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "wnl/dist.hpp"
#include "wnl/geometry.hpp"
#include "wnl/parse.hpp"
#include "wnl/pva.hpp"
#include "wnl/schouten.hpp"

namespace {

using nlohmann::json;
using namespace wnl;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream in(path);
  if (!in) throw EngineError(ErrCode::Parse, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json residuals_json(const ConditionSet& cs, const Ctx& ctx) {
  json arr = json::array();
  for (const auto& c : cs.items)
    arr.push_back({{"pattern", c.label}, {"expr", to_string(c.value, &ctx)}});
  return arr;
}

void print_residuals(const ConditionSet& cs, const Ctx& ctx) {
  for (const auto& c : cs.items)
    std::cout << "  " << c.label << ": " << to_string(c.value, &ctx) << "\n";
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};

ConditionSet jacobi_residuals(const std::string& backend, const WNLOperator& P,
                              MVCtx& mv, bool assume_skew) {
  ConditionSet out;
  if (backend == "op") {
    auto tv = schouten_bracket(P, P, Recipe::A, mv, assume_skew);
    return three_vector_residuals(tv.canonical, mv);
  }
  for (int i = 0; i < P.n; ++i)
    for (int j = 0; j < P.n; ++j)
      for (int k = 0; k < P.n; ++k) {
        std::string tag = "[" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + "," + std::to_string(k + 1) +
                          "] ";
        ConditionSet res;
        if (backend == "dist")
          res = dist_residuals(
              reduce_dist(jacobi_dist(P, mv.ctx, i, j, k, assume_skew), mv.ctx),
              mv.ctx);
        else
          res = lambda_residuals(pva_jacobi(P, mv.ctx, i, j, k, assume_skew),
                                 mv.ctx);
        for (auto& it : res.items) out.add(tag + it.label, it.value);
      }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Exact checker for weakly nonlocal Poisson brackets"};
  app.require_subcommand(1);
  std::string input = "-", backend = "op", json_out;
  bool assume_skew = false;
  app.add_option("--json", json_out,
                 "write a machine-readable report to this path ('-' = stdout)");

  auto add_common = [&](CLI::App* sub, bool with_backend) {
    sub->add_option("input", input, "operator document (JSON), '-' for stdin");
    if (with_backend)
      sub->add_option("--backend", backend, "op | dist | pva | all")
          ->check(CLI::IsMember({"op", "dist", "pva", "all"}));
    sub->add_flag("--assume-skew", assume_skew,
                  "skip the skew-symmetry hypothesis check");
  };
  auto* c_skew = app.add_subcommand("skew", "residuals of P + P*");
  add_common(c_skew, false);
  auto* c_jac = app.add_subcommand("jacobi", "Jacobi identity residuals");
  add_common(c_jac, true);
  auto* c_cond = app.add_subcommand(
      "conditions", "geometric integrability conditions (hydrodynamic only)");
  add_common(c_cond, false);
  auto* c_cmp = app.add_subcommand("compare", "cross-check every backend");
  add_common(c_cmp, false);
  auto* c_adj = app.add_subcommand("adjoint", "serialize the formal adjoint");
  add_common(c_adj, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Timer timer;
  ParsedOperator P = parse_operator(read_input(input));
  MVCtx mv(P.n);
  mv.add_tails(P.op);
  double parse_ms = timer.ms();

  json report;
  report["version"] = 1;
  int exit_code = 0;

  auto finish = [&](const std::string& verdict) {
    report["verdict"] = verdict;
    report["timings"] = {{"parse_ms", parse_ms},
                         {"total_ms", timer.ms()}};
    if (!json_out.empty()) {
      if (json_out == "-") {
        std::cout << report.dump(2) << "\n";
      } else {
        std::ofstream out(json_out);
        out << report.dump(2) << "\n";
      }
    }
    return exit_code;
  };

  if (app.got_subcommand(c_skew)) {
    report["command"] = "skew";
    ConditionSet res = skew_residuals(P.op, mv.ctx);
    report["residuals"] = residuals_json(res, mv.ctx);
    if (res.empty()) {
      std::cout << "skew: PASS (P + P* = 0)\n";
      return finish("PASS");
    }
    std::cout << "skew: FAIL, " << res.size() << " nonzero coefficients\n";
    print_residuals(res, mv.ctx);
    exit_code = 1;
    return finish("FAIL");
  }

  if (app.got_subcommand(c_adj)) {
    report["command"] = "adjoint";
    std::string s = serialize_operator(wnl::adjoint(P.op, mv.ctx), mv.ctx);
    std::cout << s << "\n";
    report["adjoint"] = json::parse(s);
    return finish("PASS");
  }

  if (app.got_subcommand(c_jac)) {
    report["command"] = "jacobi";
    report["backend"] = backend;
    if (!assume_skew) {
      ConditionSet sk = skew_residuals(P.op, mv.ctx);
      if (!sk.empty()) {
        std::cout << "jacobi: operator is not skew-adjoint; "
                     "fix skewness first or pass --assume-skew\n";
        report["residuals"] = residuals_json(sk, mv.ctx);
        exit_code = 1;
        return finish("FAIL");
      }
    }
    std::vector<std::string> backends =
        backend == "all" ? std::vector<std::string>{"op", "dist", "pva"}
                         : std::vector<std::string>{backend};
    json per = json::array();
    bool any_fail = false, first = true;
    int first_count = 0;
    for (const auto& b : backends) {
      Timer bt;
      ConditionSet res = jacobi_residuals(b, P.op, mv, true);
      bool pass = res.empty();
      any_fail |= !pass;
      std::cout << "jacobi[" << b << "]: " << (pass ? "PASS" : "FAIL");
      if (!pass) std::cout << ", " << res.size() << " residual conditions";
      std::cout << " (" << int(bt.ms()) << " ms)\n";
      if (!pass) print_residuals(res, mv.ctx);
      per.push_back({{"backend", b},
                     {"pass", pass},
                     {"residuals", residuals_json(res, mv.ctx)},
                     {"ms", bt.ms()}});
      if (first) {
        first_count = int(res.size());
        first = false;
      } else if ((first_count == 0) != res.empty()) {
        std::cerr << "internal error: backends disagree on the verdict\n";
        return 3;
      }
    }
    report["results"] = std::move(per);
    exit_code = any_fail ? 1 : 0;
    return finish(any_fail ? "FAIL" : "PASS");
  }

  if (app.got_subcommand(c_cond)) {
    report["command"] = "conditions";
    PBHTData d = P.has_pbht ? P.pbht : pbht_from_operator(P.op, mv.ctx);
    ConditionSet geo = geometric_check(d, mv.ctx);
    report["residuals"] = residuals_json(geo, mv.ctx);
    if (geo.empty()) {
      std::cout << "conditions: PASS (flat-metric compatibility and "
                   "Gauss-Codazzi hold)\n";
      return finish("PASS");
    }
    std::cout << "conditions: " << geo.size()
              << " obstruction conditions must vanish\n";
    print_residuals(geo, mv.ctx);
    exit_code = 1;
    return finish("FAIL");
  }

  // compare
  report["command"] = "compare";
  BackendReport r = compare_backends(P.op, mv);
  auto pf = [](bool b) { return b ? "PASS" : "FAIL"; };
  std::cout << "skew:      " << pf(r.skew) << "\n";
  std::cout << "op:        " << pf(r.schouten_pass) << " ("
            << r.schouten_residuals << " residuals)\n";
  std::cout << "dist:      " << pf(r.dist_pass) << " (" << r.dist_residuals
            << " residuals)\n";
  std::cout << "pva:       " << pf(r.pva_pass) << " (" << r.pva_residuals
            << " residuals)\n";
  if (r.has_geometry) {
    std::cout << "geometry:  " << pf(r.geometry_pass) << " ("
              << r.geometry_residuals << " residuals)\n";
    if (!r.geometry_pass) {
      std::cout << "reduced modulo the geometric conditions: op="
                << r.schouten_reduced << " dist=" << r.dist_reduced
                << " pva=" << r.pva_reduced << " residuals survive\n";
    }
  } else {
    std::cout << "geometry:  n/a (not hydrodynamic)\n";
  }
  report["skew"] = r.skew;
  report["backends"] = {{"op", r.schouten_pass},
                        {"dist", r.dist_pass},
                        {"pva", r.pva_pass}};
  if (r.has_geometry) {
    report["geometry"] = r.geometry_pass;
    report["reduced"] = {{"op", r.schouten_reduced},
                         {"dist", r.dist_reduced},
                         {"pva", r.pva_reduced}};
  }
  if (!r.agree()) {
    std::cerr << "internal error: backends disagree\n";
    return 3;
  }
  bool pass = r.skew && r.schouten_pass && (!r.has_geometry || r.geometry_pass);
  exit_code = pass ? 0 : 1;
  return finish(pass ? "PASS" : "FAIL");
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const EngineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code == ErrCode::Parse ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
