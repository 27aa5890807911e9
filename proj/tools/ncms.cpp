// Batch front end: evaluate coset sums, dump symbols and coefficient
// tables, extract Fourier modes, emit pairing statistics, and run the
// identity suite.  Exit codes: 0 success, 1 identity failure, 2 bad usage
// or domain error.
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ncms/bessel.hpp"
#include "ncms/common.hpp"
#include "ncms/cusp_forms.hpp"
#include "ncms/eisenstein.hpp"
#include "ncms/free_series.hpp"
#include "ncms/iterated_integrals.hpp"
#include "ncms/modular_group.hpp"
#include "ncms/verify.hpp"

namespace {

using nlohmann::json;
using namespace ncms;

struct global_config {
  long long level = 11;
  std::string label = "11a";
  std::string form_file;
  int threads = 0;  // 0 = NCMS_THREADS or 1
  std::string output = "-";
};

cusp_form load_form(const global_config& g) {
  if (!g.form_file.empty()) return cusp_form::from_file(g.form_file);
  return cusp_form::builtin(g.label);
}

cusp parse_cusp(const std::string& text) {
  if (text == "inf" || text == "infinity") return cusp::infinity();
  if (text == "zero" || text == "0") return cusp::zero();
  throw std::domain_error("unknown cusp '" + text + "' (use inf or zero)");
}

std::vector<long long> parse_int_list(const std::string& text, size_t want) {
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    size_t used = 0;
    out.push_back(std::stoll(piece, &used));
    if (used != piece.size())
      throw std::domain_error("bad integer list '" + text + "'");
  }
  if (want != 0 && out.size() != want)
    throw std::domain_error("expected " + std::to_string(want) +
                            " comma-separated integers in '" + text + "'");
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  std::string body = text;
  if (body.empty() || body.back() != '\n') body += '\n';
  if (path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::domain_error("cannot open output file " + path);
  f << body;
}

json config_echo(const global_config& g, const std::string& command) {
  return json{{"level", g.level},
              {"form", g.form_file.empty() ? g.label : g.form_file},
              {"threads", resolve_threads(g.threads)},
              {"command", command}};
}

json cplx_json(cplx v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

// --- symbol ---------------------------------------------------------------

struct symbol_args {
  std::string gamma;
  std::string base = "inf";
  int degree = 2;
  double tol = 1e-10;
};

int cmd_symbol(const global_config& g, const symbol_args& a) {
  auto m = parse_int_list(a.gamma, 4);
  group_element gamma = group_element::make(m[0], m[1], m[2], m[3]);
  gamma0 G(g.level);
  cusp_form f = load_form(g);
  symbol_context ctx(G, {f}, {f});

  free_series sym(ctx.letters(), a.degree);
  if (a.base == "inf" || a.base == "infinity") {
    symbol_engine eng(std::move(ctx), a.degree, a.tol);
    sym = eng.symbol(gamma);
  } else if (a.base == "zero" || a.base == "0") {
    sym = noncommutative_modular_symbol(ctx, gamma, path_point::at_zero(),
                                        a.degree, a.tol);
  } else {
    auto xy = a.base;
    std::stringstream ss(xy);
    double bx = 0, by = 0;
    char comma = 0;
    if (!(ss >> bx >> comma >> by) || comma != ',' || !(by > 0))
      throw std::domain_error("base must be inf, zero or 'x,y' with y > 0");
    sym = noncommutative_modular_symbol(
        ctx, gamma, path_point::interior({bx, by}), a.degree, a.tol);
  }

  json out{{"schema", "ncms-1"},
           {"config", config_echo(g, "symbol")},
           {"gamma", {m[0], m[1], m[2], m[3]}},
           {"base", a.base},
           {"degree", a.degree},
           {"tol", a.tol},
           {"series", json::parse(series_to_json(sym))}};
  write_output(g.output, out.dump(2));
  return 0;
}

// --- eval -----------------------------------------------------------------

struct eval_args {
  double s_re = 2.5, s_im = 0.0;
  double zx = 0.0, zy = 2.0;
  std::string cusp_name = "inf";
  double cmax = 1000;
  double tol = 1e-8;
  int degree = 2;
  bool classical = false;
  bool series = false;
  bool q_variant = false;
  std::string fx, gy;
  int em = -1, en = -1;
};

int cmd_eval(const global_config& g, const eval_args& a) {
  gamma0 G(g.level);
  cusp b = parse_cusp(a.cusp_name);
  cplx z(a.zx, a.zy);
  eis_params p{cplx(a.s_re, a.s_im), a.cmax, a.tol, resolve_threads(g.threads)};

  json out{{"schema", "ncms-1"},
           {"config", config_echo(g, "eval")},
           {"s", cplx_json(p.s)},
           {"z", cplx_json(z)},
           {"cusp", a.cusp_name},
           {"cmax", a.cmax},
           {"degree", a.degree}};

  eis_value v;
  if (a.classical) {
    v = classical_E(G, b, z, p);
    out["mode"] = "classical";
  } else {
    cusp_form f = load_form(g);
    symbol_context ctx(G, {f}, {f});
    symbol_engine eng(std::move(ctx), a.degree, 1e-10);
    path_point base = path_point::at_infinity();
    std::vector<int> fi, gi;
    for (long long i : a.fx.empty() ? std::vector<long long>{}
                                    : parse_int_list(a.fx, 0))
      fi.push_back(static_cast<int>(i));
    for (long long i : a.gy.empty() ? std::vector<long long>{}
                                    : parse_int_list(a.gy, 0))
      gi.push_back(static_cast<int>(i));
    if (a.series) {
      v = E_calligraphic(eng, b, z, base, p);
      out["mode"] = "series";
      out["series"] = json::parse(series_to_json(v.series));
    } else if (a.q_variant) {
      v = Q_series(eng, b, z, fi, gi, base, p);
      out["mode"] = "q";
      out["series"] = json::parse(series_to_json(v.series));
    } else if (a.em >= 0 || a.en >= 0) {
      v = E_mn(eng, b, z, std::max(a.em, 0), std::max(a.en, 0), p);
      out["mode"] = "moment";
    } else if (!fi.empty() || !gi.empty()) {
      v = twisted_E(eng, b, z, fi, gi, base, p);
      out["mode"] = "twisted";
    } else {
      v = classical_E(G, b, z, p);
      out["mode"] = "classical";
    }
  }

  out["value"] = cplx_json(v.value);
  out["trunc"] = v.truncation_estimate;
  out["cosets"] = v.cosets_used;
  write_output(g.output, out.dump(2));
  return 0;
}

// --- verify ---------------------------------------------------------------

struct verify_args {
  double cmax = 600;
  int degree = 2;
  double tol = 1e-10;
  bool inject_reversal_sign = false;
};

int cmd_verify(const global_config& g, const verify_args& a) {
  verify_options opt;
  opt.level = g.level;
  opt.label = g.label;
  opt.cmax = a.cmax;
  opt.D = a.degree;
  opt.tol = a.tol;
  opt.threads = resolve_threads(g.threads);
  opt.inject_reversal_sign = a.inject_reversal_sign;

  auto rows = run_verify(opt);
  json jrows = json::array();
  for (const auto& r : rows) {
    jrows.push_back(json{{"name", r.name},
                         {"statement", r.statement},
                         {"residual", r.residual},
                         {"tolerance", r.tolerance},
                         {"pass", r.pass},
                         {"gating", r.gating},
                         {"note", r.note}});
    std::fprintf(stderr, "%-26s %-6s residual %.3e (tol %.1e)%s\n",
                 r.name.c_str(), r.pass ? "pass" : "FAIL", r.residual,
                 r.tolerance, r.gating ? "" : " [soft]");
  }
  bool ok = all_gating_pass(rows);
  json out{{"schema", "ncms-1"},
           {"config", config_echo(g, "verify")},
           {"rows", jrows},
           {"all_pass", ok}};
  write_output(g.output, out.dump(2));
  return ok ? 0 : 1;
}

// --- stats ----------------------------------------------------------------

struct stats_args {
  double t_max = 10000;
  std::string csv = "stats.csv";
  int degree = 1;
  double tol = 1e-10;
};

int cmd_stats(const global_config& g, const stats_args& a) {
  gamma0 G(g.level);
  cusp_form f = load_form(g);
  symbol_context ctx(G, {f}, {f});
  symbol_engine eng(std::move(ctx), a.degree, a.tol);
  stats_summary st = pairing_stats(eng, a.t_max);

  std::ostringstream csv;
  csv << "c,d,re_pairing,im_pairing\n";
  char line[128];
  for (const stats_row& r : st.rows) {
    std::snprintf(line, sizeof line, "%lld,%lld,%.12g,%.12g\n", r.c, r.d,
                  r.value.real(), r.value.imag());
    csv << line;
  }
  write_output(a.csv, csv.str());

  json out{{"schema", "ncms-1"},
           {"config", config_echo(g, "stats")},
           {"t_max", a.t_max},
           {"count", st.count},
           {"sum_sq", st.sum_sq},
           {"mean", st.mean},
           {"variance", st.variance},
           {"skewness", st.skewness},
           {"csv", a.csv}};
  write_output(g.output, out.dump(2));
  return 0;
}

// --- fourier --------------------------------------------------------------

struct fourier_args {
  int k = 0;
  double y = 0.9, y2 = 1.3;
  int npoints = 64;
  double s_re = 2.5, s_im = 0.0;
  std::string cusp_name = "inf";
  double cmax = 600;
  double tol = 1e-9;
  std::string fx, gy;
  int degree = 2;
};

int cmd_fourier(const global_config& g, const fourier_args& a) {
  gamma0 G(g.level);
  cusp b = parse_cusp(a.cusp_name);
  cplx s(a.s_re, a.s_im);
  eis_params p{s, a.cmax, a.tol, resolve_threads(g.threads)};

  std::vector<int> fi, gi;
  for (long long i :
       a.fx.empty() ? std::vector<long long>{} : parse_int_list(a.fx, 0))
    fi.push_back(static_cast<int>(i));
  for (long long i :
       a.gy.empty() ? std::vector<long long>{} : parse_int_list(a.gy, 0))
    gi.push_back(static_cast<int>(i));

  std::function<cplx(cplx)> F;
  std::optional<symbol_engine> eng;
  if (fi.empty() && gi.empty()) {
    F = [&](cplx w) { return classical_E(G, b, w, p).value; };
  } else {
    cusp_form f = load_form(g);
    eng.emplace(symbol_context(G, {f}, {f}), a.degree, 1e-10);
    F = [&](cplx w) {
      return twisted_E(*eng, b, w, fi, gi, path_point::at_infinity(), p).value;
    };
  }

  json out{{"schema", "ncms-1"},
           {"config", config_echo(g, "fourier")},
           {"s", cplx_json(s)},
           {"cusp", a.cusp_name},
           {"k", a.k},
           {"npoints", a.npoints}};

  if (a.k == 0) {
    // mode 0 is a y^s / y^{1-s} combination; two heights separate the parts
    cplx c1 = fourier_coefficient(F, 0, a.y, a.npoints);
    cplx c2 = fourier_coefficient(F, 0, a.y2, a.npoints);
    cplx a11 = std::pow(cplx(a.y, 0), s), a12 = std::pow(cplx(a.y, 0), 1.0 - s);
    cplx a21 = std::pow(cplx(a.y2, 0), s),
         a22 = std::pow(cplx(a.y2, 0), 1.0 - s);
    cplx det = a11 * a22 - a12 * a21;
    cplx alpha = (c1 * a22 - c2 * a12) / det;
    cplx beta = (a11 * c2 - a21 * c1) / det;
    out["heights"] = {a.y, a.y2};
    out["mode0"] = {cplx_json(c1), cplx_json(c2)};
    out["ys_part"] = cplx_json(alpha);
    out["y1s_part"] = cplx_json(beta);
  } else {
    cplx raw = fourier_coefficient(F, a.k, a.y, a.npoints);
    cplx w = whittaker_w(a.k, cplx(0.0, a.y), s);
    out["height"] = a.y;
    out["raw"] = cplx_json(raw);
    out["normalized"] = cplx_json(raw / w);
  }
  write_output(g.output, out.dump(2));
  return 0;
}

// --- coeffs ---------------------------------------------------------------

struct coeffs_args {
  int count = 50;
  std::string cusp_name = "inf";
};

int cmd_coeffs(const global_config& g, const coeffs_args& a) {
  cusp_form f = load_form(g);
  f.ensure_coefficients(a.count);
  cusp b = parse_cusp(a.cusp_name);
  json arr = json::array();
  for (int m = 1; m <= a.count; ++m) arr.push_back(f.coefficient_at_cusp(m, b));
  json out{{"schema", "ncms-1"},
           {"config", config_echo(g, "coeffs")},
           {"label", f.label()},
           {"level", f.level()},
           {"atkin_lehner_sign", f.atkin_lehner_sign()},
           {"cusp", a.cusp_name},
           {"count", a.count},
           {"coefficients", arr}};
  write_output(g.output, out.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noncommutative modular symbol and Eisenstein series toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file; command-line flags win");

  global_config g;
  app.add_option("--level", g.level, "congruence level N")
      ->check(CLI::PositiveNumber);
  app.add_option("--form", g.label, "built-in cusp form label");
  app.add_option("--form-file", g.form_file,
                 "read the cusp form from a coefficient file instead");
  app.add_option("--threads", g.threads,
                 "worker threads (default: NCMS_THREADS or 1)");
  app.add_option("-o,--output", g.output, "output path, '-' for stdout");

  symbol_args sa;
  auto* sym = app.add_subcommand("symbol", "series of one group element");
  sym->add_option("--gamma", sa.gamma, "matrix entries a,b,c,d")->required();
  sym->add_option("--base", sa.base, "inf, zero, or interior 'x,y'");
  sym->add_option("--degree", sa.degree, "series truncation degree")
      ->check(CLI::Range(0, 8));
  sym->add_option("--tol", sa.tol, "integration tolerance");

  eval_args ea;
  auto* ev = app.add_subcommand("eval", "evaluate a coset sum at a point");
  ev->add_option("--s-re", ea.s_re, "Re s (must be > 1)");
  ev->add_option("--s-im", ea.s_im, "Im s");
  ev->add_option("--zx", ea.zx, "Re z");
  ev->add_option("--zy", ea.zy, "Im z")->check(CLI::PositiveNumber);
  ev->add_option("--cusp", ea.cusp_name, "expansion cusp: inf or zero");
  ev->add_option("--cmax", ea.cmax, "coset truncation height");
  ev->add_option("--tol", ea.tol, "translate-sum tolerance");
  ev->add_option("--degree", ea.degree, "series degree for twisted modes");
  ev->add_flag("--classical", ea.classical, "plain Im^s sum");
  ev->add_flag("--series", ea.series, "full series-valued sum");
  ev->add_flag("--q", ea.q_variant, "integrals end at the moving point");
  ev->add_option("--fx", ea.fx, "X word, e.g. '1' or '1,1'");
  ev->add_option("--gy", ea.gy, "Y word indices");
  ev->add_option("--em", ea.em, "pairing-power moment: X exponent");
  ev->add_option("--en", ea.en, "pairing-power moment: Y exponent");

  verify_args va;
  auto* vf = app.add_subcommand("verify", "run the identity suite");
  vf->add_option("--cmax", va.cmax, "coset truncation for series rows");
  vf->add_option("--degree", va.degree, "series degree");
  vf->add_option("--tol", va.tol, "integration tolerance");
  vf->add_flag("--inject-reversal-sign", va.inject_reversal_sign,
               "flip one sign in the reversal check (harness self-test)");

  stats_args ta;
  auto* st = app.add_subcommand("stats", "pairing table over bottom rows");
  st->add_option("--t-max", ta.t_max, "include rows with c^2+d^2 <= T")
      ->check(CLI::Range(0.0, 1e6));
  st->add_option("--csv", ta.csv, "CSV path, '-' for stdout");
  st->add_option("--tol", ta.tol, "integration tolerance");

  fourier_args fa;
  auto* fo = app.add_subcommand("fourier", "horocycle Fourier mode");
  fo->add_option("--k", fa.k, "mode number");
  fo->add_option("--y", fa.y, "horocycle height")->check(CLI::PositiveNumber);
  fo->add_option("--y2", fa.y2, "second height for the k=0 solve")
      ->check(CLI::PositiveNumber);
  fo->add_option("--npoints", fa.npoints, "quadrature points (>= 8)");
  fo->add_option("--s-re", fa.s_re, "Re s");
  fo->add_option("--s-im", fa.s_im, "Im s");
  fo->add_option("--cusp", fa.cusp_name, "expansion cusp");
  fo->add_option("--cmax", fa.cmax, "coset truncation height");
  fo->add_option("--tol", fa.tol, "translate-sum tolerance");
  fo->add_option("--fx", fa.fx, "X word for a twisted mode");
  fo->add_option("--gy", fa.gy, "Y word for a twisted mode");

  coeffs_args ca;
  auto* co = app.add_subcommand("coeffs", "dump cusp form coefficients");
  co->add_option("--count", ca.count, "how many coefficients")
      ->check(CLI::Range(1, 2000000));
  co->add_option("--cusp", ca.cusp_name, "expansion cusp: inf or zero");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sym->parsed()) return cmd_symbol(g, sa);
    if (ev->parsed()) return cmd_eval(g, ea);
    if (vf->parsed()) return cmd_verify(g, va);
    if (st->parsed()) return cmd_stats(g, ta);
    if (fo->parsed()) return cmd_fourier(g, fa);
    if (co->parsed()) return cmd_coeffs(g, ca);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
