#include "zflow/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <sstream>

#include "zflow/errors.hpp"
#include "zflow/gaf.hpp"
#include "zflow/heatflow.hpp"
#include "zflow/metaplectic.hpp"
#include "zflow/rng.hpp"
#include "zflow/stats.hpp"
#include "zflow/zeros.hpp"

namespace zflow {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

struct Config {
  std::string command;
  std::uint64_t seed = 1;
  int n_max = 120;
  int trials = 200;
  std::string tau_text = "0";
  std::string tau_path_text;
  std::string function_spec;
  std::string out_dir = ".";
  std::string format = "csv";
  bool strict = false;

  json to_json() const {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["seed"] = seed;
    j["nmax"] = n_max;
    j["trials"] = trials;
    j["tau"] = tau_text;
    if (!tau_path_text.empty()) j["tau_path"] = tau_path_text;
    if (!function_spec.empty()) j["function"] = function_spec;
    j["format"] = format;
    j["strict"] = strict;
    return j;
  }
};

class OutputFile {
 public:
  OutputFile(const Config& cfg, const std::string& stem) : cfg_(cfg) {
    fs::create_directories(cfg.out_dir);
    path_ = fs::path(cfg.out_dir) / (stem + "." + cfg.format);
    stream_.open(path_);
    if (!stream_) throw Error("cannot open output file " + path_.string());
  }

  void write_csv(const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    stream_ << "# config=" << cfg_.to_json().dump() << "\n";
    for (std::size_t i = 0; i < header.size(); ++i)
      stream_ << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
      for (std::size_t i = 0; i < row.size(); ++i)
        stream_ << row[i] << (i + 1 < row.size() ? "," : "\n");
  }

  void write_json(json results) {
    json doc;
    doc["config"] = cfg_.to_json();
    doc["results"] = std::move(results);
    stream_ << doc.dump(2) << "\n";
  }

  const fs::path& path() const { return path_; }

 private:
  const Config& cfg_;
  fs::path path_;
  std::ofstream stream_;
};

// ---- function specs ------------------------------------------------------

struct FunctionSpec {
  enum class Kind { poly, eqp, taylor, gaf } kind;
  ExpQuadPoly eqp;
  TaylorFunction taylor;
  bool taylor_polynomial_mode = false;  // truncations: no flow-radius guard
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<cplx> parse_complex_list(const std::string& s) {
  std::vector<cplx> out;
  for (const auto& p : split(s, ';'))
    if (!p.empty()) out.push_back(parse_complex(p));
  return out;
}

TaylorFunction taylor_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read taylor coefficients file " + path);
  json j;
  in >> j;
  if (!j.contains("weyl_coeffs")) throw Error("taylor file: missing \"weyl_coeffs\"");
  std::vector<cplx> w;
  for (const auto& e : j["weyl_coeffs"]) w.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  return TaylorFunction::from_weyl(std::move(w));
}

FunctionSpec parse_function(const std::string& spec, const Config& cfg) {
  const auto parts = split(spec, ':');
  const std::string& head = parts[0];
  FunctionSpec out{};
  if (head == "poly") {
    if (parts.size() != 2) throw Error("poly spec: poly:c0;c1;...");
    out.kind = FunctionSpec::Kind::poly;
    out.eqp = ExpQuadPoly{0.0, 0.0, 0.0, ComplexPoly(parse_complex_list(parts[1]))};
    return out;
  }
  if (head == "eqp") {
    out.kind = FunctionSpec::Kind::eqp;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto kv = split(parts[i], '=');
      if (kv.size() != 2) throw Error("eqp spec: eqp:quad=..:lin=..:cst=..:poly=c0;c1;...");
      if (kv[0] == "quad")
        out.eqp.quad = parse_complex(kv[1]);
      else if (kv[0] == "lin")
        out.eqp.lin = parse_complex(kv[1]);
      else if (kv[0] == "cst")
        out.eqp.cst = parse_complex(kv[1]);
      else if (kv[0] == "poly")
        out.eqp.poly = ComplexPoly(parse_complex_list(kv[1]));
      else
        throw Error("eqp spec: unknown field " + kv[0]);
    }
    return out;
  }
  if (head == "taylor") {
    if (parts.size() != 2) throw Error("taylor spec: taylor:file.json");
    out.kind = FunctionSpec::Kind::taylor;
    out.taylor = taylor_from_file(parts[1]);
    return out;
  }
  if (head == "builtin") {
    if (parts.size() < 2) throw Error("builtin spec: builtin:{sin_pi_z2,theta,exp_sine,gaf}[:...]");
    const std::string& name = parts[1];
    std::map<std::string, std::string> kw;
    for (std::size_t i = 2; i < parts.size(); ++i) {
      const auto kv = split(parts[i], '=');
      if (kv.size() == 2) kw[kv[0]] = kv[1];
    }
    out.kind = FunctionSpec::Kind::taylor;
    if (name == "sin_pi_z2") {
      out.taylor = taylor_sin_pi_z2(std::max(cfg.n_max, 170));
    } else if (name == "exp_sine") {
      const cplx a0 = kw.count("a0") ? parse_complex(kw["a0"]) : cplx(0.0);
      const cplx a1 = kw.count("a1") ? parse_complex(kw["a1"]) : cplx(0.0);
      out.taylor = taylor_exp_sine(a0, a1, std::max(cfg.n_max, 120));
    } else if (name == "theta") {
      const cplx sigma = kw.count("sigma") ? parse_complex(kw["sigma"]) : cplx(0.0, 1.0);
      out.taylor = theta_coeffs(sigma, std::max(cfg.n_max, 160));
    } else if (name == "gaf") {
      out.kind = FunctionSpec::Kind::gaf;
      out.taylor = sample_gaf(cfg.n_max, cfg.seed).taylor;
      out.taylor_polynomial_mode = true;
    } else {
      throw Error("unknown builtin " + name);
    }
    return out;
  }
  throw Error("unknown function spec kind " + head);
}

std::vector<cplx> linspace_path(const std::string& text) {
  // "a:b:steps" with real or complex endpoints
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw Error("tau path: a:b:steps");
  const cplx a = parse_complex(parts[0]);
  const cplx b = parse_complex(parts[1]);
  const int steps = std::stoi(parts[2]);
  if (steps < 1) throw Error("tau path: steps must be >= 1");
  std::vector<cplx> path;
  for (int i = 0; i <= steps; ++i)
    path.push_back(a + (b - a) * (static_cast<double>(i) / steps));
  return path;
}

std::vector<cplx> probe_points() {
  std::vector<cplx> pts{cplx(0.0)};
  for (double r : {0.5, 1.0, 2.0})
    for (int k = 0; k < 8; ++k) {
      const double ang = 2.0 * 3.141592653589793 * k / 8;
      pts.push_back(r * cplx(std::cos(ang), std::sin(ang)));
    }
  return pts;
}

// ---- flow -----------------------------------------------------------------

int cmd_flow(const Config& cfg) {
  const FunctionSpec f = parse_function(cfg.function_spec, cfg);
  const cplx tau = parse_complex(cfg.tau_text);

  json coeffs_result;
  std::vector<std::vector<std::string>> coeff_rows;
  std::vector<std::string> coeff_header;
  std::function<cplx(cplx)> evaluate;

  if (f.kind == FunctionSpec::Kind::poly) {
    const ComplexPoly flowed = heat_poly(f.eqp.poly, tau);
    coeff_header = {"n", "re", "im"};
    for (int k = 0; k <= flowed.degree(); ++k)
      coeff_rows.push_back({std::to_string(k), fmt_double(flowed.coeff(k).real()),
                            fmt_double(flowed.coeff(k).imag())});
    coeffs_result["kind"] = "poly";
    json arr = json::array();
    for (int k = 0; k <= flowed.degree(); ++k) arr.push_back(cplx_json(flowed.coeff(k)));
    coeffs_result["coeffs"] = arr;
    evaluate = [flowed](cplx z) { return flowed.eval(z); };
  } else if (f.kind == FunctionSpec::Kind::eqp) {
    const ExpQuadPoly flowed = heat_expquadpoly(f.eqp, tau);
    coeff_header = {"name", "re", "im"};
    coeff_rows.push_back({"quad", fmt_double(flowed.quad.real()), fmt_double(flowed.quad.imag())});
    coeff_rows.push_back({"lin", fmt_double(flowed.lin.real()), fmt_double(flowed.lin.imag())});
    coeff_rows.push_back({"cst", fmt_double(flowed.cst.real()), fmt_double(flowed.cst.imag())});
    for (int k = 0; k <= flowed.poly.degree(); ++k)
      coeff_rows.push_back({"p" + std::to_string(k), fmt_double(flowed.poly.coeff(k).real()),
                            fmt_double(flowed.poly.coeff(k).imag())});
    coeffs_result["kind"] = "expquadpoly";
    coeffs_result["quad"] = cplx_json(flowed.quad);
    coeffs_result["lin"] = cplx_json(flowed.lin);
    coeffs_result["cst"] = cplx_json(flowed.cst);
    json arr = json::array();
    for (int k = 0; k <= flowed.poly.degree(); ++k) arr.push_back(cplx_json(flowed.poly.coeff(k)));
    coeffs_result["poly"] = arr;
    evaluate = [flowed](cplx z) { return eval_expquadpoly(flowed, z); };
  } else {
    const HeatDomain domain = f.taylor_polynomial_mode ? HeatDomain::unrestricted()
                                                       : HeatDomain::for_taylor(f.taylor);
    const TaylorFunction flowed = heat_taylor(f.taylor, tau, domain);
    coeff_header = {"n", "re", "im"};
    for (int k = 0; k <= flowed.n_max(); ++k)
      coeff_rows.push_back({std::to_string(k), fmt_double(flowed.weyl_coeff(k).real()),
                            fmt_double(flowed.weyl_coeff(k).imag())});
    coeffs_result["kind"] = "taylor_weyl";
    json arr = json::array();
    for (int k = 0; k <= flowed.n_max(); ++k) arr.push_back(cplx_json(flowed.weyl_coeff(k)));
    coeffs_result["weyl_coeffs"] = arr;
    evaluate = [flowed](cplx z) { return flowed.eval(z); };
  }

  std::vector<std::vector<std::string>> eval_rows;
  json eval_result = json::array();
  for (cplx z : probe_points()) {
    const cplx v = evaluate(z);
    eval_rows.push_back(
        {fmt_double(z.real()), fmt_double(z.imag()), fmt_double(v.real()), fmt_double(v.imag())});
    eval_result.push_back(json{{"z", cplx_json(z)}, {"value", cplx_json(v)}});
  }

  if (cfg.format == "csv") {
    OutputFile coeffs(cfg, "flow_coeffs");
    coeffs.write_csv(coeff_header, coeff_rows);
    OutputFile evals(cfg, "flow_eval");
    evals.write_csv({"z_re", "z_im", "f_re", "f_im"}, eval_rows);
  } else {
    OutputFile outf(cfg, "flow");
    outf.write_json(json{{"coefficients", coeffs_result}, {"evaluations", eval_result}});
  }
  return 0;
}

// ---- trajectories ---------------------------------------------------------

int cmd_trajectories(const Config& cfg, int count) {
  const FunctionSpec f = parse_function(cfg.function_spec, cfg);
  const std::vector<cplx> path =
      cfg.tau_path_text.empty() ? linspace_path("0:0.5:50") : linspace_path(cfg.tau_path_text);

  std::unique_ptr<FlowField> flow;
  std::vector<cplx> starts;
  if (f.kind == FunctionSpec::Kind::poly || f.kind == FunctionSpec::Kind::eqp) {
    flow = std::make_unique<ExpQuadFlow>(f.eqp);
    const ZeroSet zs = find_roots(f.eqp.poly);
    starts = zs.zeros;
  } else {
    flow = f.taylor_polynomial_mode
               ? std::make_unique<TaylorFlow>(TaylorFlow::polynomial_mode(f.taylor))
               : std::make_unique<TaylorFlow>(f.taylor);
    const ZeroSet zs = find_roots(f.taylor.to_ordinary_poly());
    starts = zs.zeros;
    std::sort(starts.begin(), starts.end(),
              [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  }
  if (count > 0 && std::ssize(starts) > count) starts.resize(count);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t id = 0; id < starts.size(); ++id) {
    const cplx a = starts[id];
    ZeroTrajectory traj;
    std::string status;
    try {
      traj = track_zero(*flow, a, path);
      status = to_string(traj.status);
    } catch (const Error& e) {
      traj.samples.push_back({path[0], a});
      status = "start_error";
    }
    for (const auto& s : traj.samples) {
      const cplx ref = a + s.tau * std::conj(a);
      const cplx fluct = s.z - s.tau * std::conj(a);
      rows.push_back({std::to_string(id), fmt_double(s.tau.real()), fmt_double(s.z.real()),
                      fmt_double(s.z.imag()), status, fmt_double(ref.real()),
                      fmt_double(ref.imag()), fmt_double(fluct.real()),
                      fmt_double(fluct.imag())});
    }
  }

  if (cfg.format == "csv") {
    OutputFile outf(cfg, "trajectories");
    outf.write_csv({"traj_id", "tau", "re", "im", "status", "ref_re", "ref_im", "fluct_re",
                    "fluct_im"},
                   rows);
  } else {
    json results = json::array();
    for (const auto& r : rows)
      results.push_back(json{{"traj_id", std::stoi(r[0])},
                             {"tau", std::stod(r[1])},
                             {"z", json::array({std::stod(r[2]), std::stod(r[3])})},
                             {"status", r[4]}});
    OutputFile outf(cfg, "trajectories");
    outf.write_json(results);
  }
  return 0;
}

// ---- residuals ------------------------------------------------------------

int cmd_residuals(const Config& cfg, const std::string& anchors_text, double alpha) {
  const std::vector<cplx> anchors = parse_complex_list(anchors_text);
  if (anchors.empty()) throw Error("residuals: need at least one anchor");
  const cplx tau = parse_complex(cfg.tau_text);
  if (std::abs(tau.imag()) > 0.0) throw Error("residuals: tau must be real");

  std::vector<ResidualOutcome> outcomes;
  for (std::size_t i = 0; i < anchors.size(); ++i)
    outcomes.push_back(residual_experiment(anchors[i], tau.real(), cfg.trials, cfg.n_max,
                                           cfg.seed, i * static_cast<std::uint64_t>(cfg.trials)));

  bool stats_ok = true;
  json results = json::array();
  const double threshold = anchors.size() > 1 ? alpha / static_cast<double>(anchors.size() - 1)
                                              : 0.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    json entry;
    entry["anchor"] = cplx_json(anchors[i]);
    json res = json::array();
    for (cplx r : outcomes[i].residuals) res.push_back(cplx_json(r));
    entry["residuals"] = std::move(res);
    json st;
    for (const auto& [k, v] : outcomes[i].statuses) st[to_string(k)] = v;
    entry["statuses"] = std::move(st);
    if (i > 0) {
      const TestReport rep = two_sample_energy(outcomes[i].residuals, outcomes[0].residuals,
                                               500, cfg.seed + 7 * i);
      entry["test_vs_first"] = json{{"statistic", rep.statistic},
                                    {"p_value", rep.p_value},
                                    {"method", "energy_permutation"},
                                    {"n1", rep.n1},
                                    {"n2", rep.n2}};
      if (rep.p_value < threshold) stats_ok = false;
    } else {
      entry["test_vs_first"] = nullptr;
    }
    results.push_back(std::move(entry));
  }

  Config jc = cfg;
  jc.format = "json";
  OutputFile outf(jc, "residuals");
  outf.write_json(results);
  return (cfg.strict && !stats_ok) ? 2 : 0;
}

// ---- metaplectic-check ----------------------------------------------------

int cmd_metaplectic_check(const Config& cfg) {
  RngStream rng(cfg.seed, 0x3e7a);
  const ExpQuadPoly test_fn{0.1, 0.0, 0.0, ComplexPoly({cplx(0.0), cplx(0.0), cplx(1.0)})};

  int matched = 0, mismatched = 0, skipped = 0, minus_signs = 0;
  double max_err = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    auto random_element = [&] {
      const double theta = 2.0 * 3.141592653589793 * rng.uniform();
      const double r = 0.6 * rng.uniform();
      const double ang = 2.0 * 3.141592653589793 * rng.uniform();
      return multiply(rotation(theta), atau_matrix(r * cplx(std::cos(ang), std::sin(ang))));
    };
    const ComposeReport rep = compose_check(random_element(), random_element(), test_fn);
    if (rep.skipped) {
      ++skipped;
      continue;
    }
    if (rep.match) {
      ++matched;
      max_err = std::max(max_err, rep.max_rel_err);
      if (rep.sign < 0) ++minus_signs;
    } else {
      ++mismatched;
    }
  }

  // V(A_tau) = V_tau for real tau, exact on the closed class.
  double va_err = 0.0;
  {
    const cplx tau(0.3, 0.0);
    const ExpQuadPoly via_group = apply_VA(test_fn, atau_matrix(tau));
    const ExpQuadPoly direct = apply_Vtau(test_fn, tau);
    va_err = std::max({std::abs(via_group.quad - direct.quad),
                       std::abs(via_group.lin - direct.lin),
                       std::abs(std::exp(via_group.cst - direct.cst) - 1.0)});
    for (int k = 0; k <= direct.poly.degree(); ++k)
      va_err = std::max(va_err, std::abs(via_group.poly.coeff(k) - direct.poly.coeff(k)) /
                                    std::max(1.0, std::abs(direct.poly.coeff(k))));
  }

  // Rotation through 2 pi along a sampled path lands on -I in the double cover.
  int sign_2pi = +1;
  {
    std::vector<GroupElement> loop;
    for (int i = 0; i <= 64; ++i) loop.push_back(rotation(2.0 * 3.141592653589793 * i / 64));
    sign_2pi = continued_sign_along(loop);
  }

  // Hyperbolic transformation law of the normalized covariance, squared to
  // stay on the single cover.
  double hyp_err = 0.0;
  for (int t = 0; t < 100; ++t) {
    const cplx q = 0.8 * cplx(rng.uniform() * 2 - 1, rng.uniform() * 2 - 1);
    const cplx p = std::sqrt(1.0 + std::norm(q)) *
                   std::exp(cplx(0.0, 2.0 * 3.141592653589793 * rng.uniform()));
    const cplx tau = 0.7 * cplx(rng.uniform() * 2 - 1, rng.uniform() * 2 - 1);
    const cplx sig = 0.7 * cplx(rng.uniform() * 2 - 1, rng.uniform() * 2 - 1);
    const cplx z(rng.uniform() * 2 - 1, rng.uniform() * 2 - 1);
    const cplx w(rng.uniform() * 2 - 1, rng.uniform() * 2 - 1);
    const auto [phi_t, psi_t] = hyperbolic_phi_psi(p, q, tau);
    const auto [phi_s, psi_s] = hyperbolic_phi_psi(p, q, sig);
    const cplx lhs = covariance_Q_pred(psi_t * z, psi_s * w, phi_t, phi_s);
    const cplx rhs = covariance_Q_pred(z, w, tau, sig);
    const cplx ratio2 = (lhs / rhs) * (lhs / rhs);
    hyp_err = std::max(hyp_err, std::abs(ratio2 - psi_s / psi_t) / std::abs(psi_s / psi_t));
  }

  json results;
  results["composition"] = json{{"checked", matched + mismatched},
                                {"matched", matched},
                                {"mismatched", mismatched},
                                {"skipped", skipped},
                                {"minus_signs", minus_signs},
                                {"max_rel_err", max_err}};
  results["va_equals_vtau_max_err"] = va_err;
  results["rotation_2pi_sign"] = sign_2pi;
  results["hyperbolic_identity_max_rel_err"] = hyp_err;

  Config jc = cfg;
  jc.format = "json";
  OutputFile outf(jc, "metaplectic_check");
  outf.write_json(results);

  const bool ok = mismatched == 0 && sign_2pi == -1 && va_err < 1e-12 && hyp_err < 1e-10;
  return (cfg.strict && !ok) ? 2 : 0;
}

// ---- covariance -----------------------------------------------------------

int cmd_covariance(const Config& cfg, const std::string& sigma_text, bool vtau_mode,
                   int grid_size) {
  const cplx tau = parse_complex(cfg.tau_text);
  const cplx sigma = sigma_text.empty() ? tau : parse_complex(sigma_text);

  std::vector<cplx> zs, ws;
  for (int i = 0; i < grid_size; ++i) {
    const double ang = 2.0 * 3.141592653589793 * i / grid_size;
    zs.push_back(0.8 * cplx(std::cos(ang), std::sin(ang)));
    ws.push_back(0.8 * cplx(std::cos(ang + 0.39), std::sin(ang + 0.39)));
  }
  std::vector<std::pair<cplx, cplx>> probes;
  for (cplx z : zs)
    for (cplx w : ws) probes.emplace_back(z, w);

  CovarianceGrid grid;
  if (vtau_mode) {
    const int n_max = cfg.n_max;
    const cplx t = tau;
    const TrialEvaluator sampler = [n_max, t](std::uint64_t seed, std::uint64_t trial,
                                              std::span<const cplx> pts, std::span<cplx> out) {
      const GafSample g = sample_gaf(n_max, seed, trial);
      const ExpQuadTaylor v = apply_Vtau(g.taylor, t);
      v.eval_batch(pts, out);
    };
    grid = empirical_covariance(sampler, probes, cfg.trials, cfg.seed);
  } else {
    // E[G_tau(z) conj(G_sigma(w))] pairs two different flows of the same
    // sample, which does not fit the single-evaluator grid helper.
    const int n_max = cfg.n_max;
    grid.points = probes;
    grid.trials = cfg.trials;
    grid.estimates.assign(probes.size(), cplx(0.0));
    grid.std_errors.assign(probes.size(), 0.0);
    std::vector<cplx> meanv(probes.size(), cplx(0.0));
    std::vector<double> m2(probes.size(), 0.0);
    for (int t = 0; t < cfg.trials; ++t) {
      const GafSample g = sample_gaf(n_max, cfg.seed, t);
      const TaylorFunction ft = heat_taylor(g.taylor, tau, HeatDomain::unrestricted());
      const TaylorFunction fs = heat_taylor(g.taylor, sigma, HeatDomain::unrestricted());
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const cplx prod = ft.eval(probes[i].first) * std::conj(fs.eval(probes[i].second));
        const cplx delta = prod - meanv[i];
        meanv[i] += delta / static_cast<double>(t + 1);
        m2[i] += std::real(delta * std::conj(prod - meanv[i]));
      }
    }
    grid.estimates = meanv;
    for (std::size_t i = 0; i < probes.size(); ++i)
      grid.std_errors[i] = std::sqrt(std::max(0.0, m2[i] / (cfg.trials - 1)) / cfg.trials);
  }

  int within = 0;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto [z, w] = probes[i];
    const cplx pred = vtau_mode ? std::exp(z * std::conj(w)) : covariance_pred(z, w, tau, sigma);
    const double err = std::abs(grid.estimates[i] - pred);
    if (err <= 5.0 * grid.std_errors[i]) ++within;
    rows.push_back({fmt_double(z.real()), fmt_double(z.imag()), fmt_double(w.real()),
                    fmt_double(w.imag()), fmt_double(grid.estimates[i].real()),
                    fmt_double(grid.estimates[i].imag()), fmt_double(pred.real()),
                    fmt_double(pred.imag()), fmt_double(grid.std_errors[i])});
  }

  if (cfg.format == "csv") {
    OutputFile outf(cfg, "covariance");
    outf.write_csv({"z_re", "z_im", "w_re", "w_im", "est_re", "est_im", "pred_re", "pred_im",
                    "se"},
                   rows);
  } else {
    json results = json::array();
    for (const auto& r : rows)
      results.push_back(json{{"z", json::array({std::stod(r[0]), std::stod(r[1])})},
                             {"w", json::array({std::stod(r[2]), std::stod(r[3])})},
                             {"estimate", json::array({std::stod(r[4]), std::stod(r[5])})},
                             {"prediction", json::array({std::stod(r[6]), std::stod(r[7])})},
                             {"se", std::stod(r[8])}});
    OutputFile outf(cfg, "covariance");
    outf.write_json(results);
  }

  const bool ok = within * 100 >= static_cast<int>(probes.size()) * 95;
  return (cfg.strict && !ok) ? 2 : 0;
}

}  // namespace

cplx parse_complex(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw Error("empty complex literal");
  // pure imaginary or real
  if (s.back() == 'i' || s.back() == 'I') {
    // split into real + imaginary at the last +/- that is not an exponent sign
    std::size_t split_pos = std::string::npos;
    for (std::size_t i = s.size() - 1; i > 0; --i) {
      if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
        split_pos = i;
        break;
      }
    }
    std::string re_part = "0", im_part;
    if (split_pos == std::string::npos) {
      im_part = s.substr(0, s.size() - 1);
    } else {
      re_part = s.substr(0, split_pos);
      im_part = s.substr(split_pos, s.size() - split_pos - 1);
    }
    if (im_part.empty() || im_part == "+" || im_part == "-") im_part += "1";
    return {std::stod(re_part), std::stod(im_part)};
  }
  return {std::stod(s), 0.0};
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{std::string(kVersion) +
               " - heat flow on entire functions, GAF experiments, zero dynamics"};
  app.require_subcommand(1);

  Config cfg;
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--nmax", cfg.n_max, "truncation degree");
  app.add_option("--trials", cfg.trials, "Monte Carlo trials");
  app.add_option("--tau", cfg.tau_text, "flow time (complex literal, e.g. 0.5 or 0.3-0.1i)");
  app.add_option("--tau-path", cfg.tau_path_text, "a:b:steps");
  app.add_option("--out", cfg.out_dir, "output directory");
  app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--strict", cfg.strict, "statistical failures become nonzero exit codes");

  auto* flow = app.add_subcommand("flow", "apply the heat operator and write coefficients");
  flow->add_option("--function", cfg.function_spec, "function spec")->required();

  auto* traj = app.add_subcommand("trajectories", "track zeros along a tau path");
  traj->add_option("--function", cfg.function_spec, "function spec")->required();
  int traj_count = 0;
  traj->add_option("--count", traj_count, "track only the count smallest zeros (0 = all)");

  auto* resid = app.add_subcommand("residuals", "zero-drift residual experiment");
  std::string anchors = "0";
  resid->add_option("--anchors", anchors, "semicolon-separated anchors, e.g. 0;2;2i;3+i");
  double alpha = 0.01;
  resid->add_option("--alpha", alpha, "test level before Bonferroni");

  auto* meta = app.add_subcommand("metaplectic-check", "composition/sign/covariance identities");

  auto* cov = app.add_subcommand("covariance", "empirical vs predicted covariance");
  std::string sigma_text;
  cov->add_option("--sigma", sigma_text, "second flow time (defaults to tau)");
  bool vtau_mode = false;
  cov->add_flag("--vtau", vtau_mode, "sample V_tau G and compare against e^{z conj(w)}");
  int grid_size = 5;
  cov->add_option("--grid", grid_size, "probe grid size per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (flow->parsed()) {
      cfg.command = "flow";
      return cmd_flow(cfg);
    }
    if (traj->parsed()) {
      cfg.command = "trajectories";
      return cmd_trajectories(cfg, traj_count);
    }
    if (resid->parsed()) {
      cfg.command = "residuals";
      return cmd_residuals(cfg, anchors, alpha);
    }
    if (meta->parsed()) {
      cfg.command = "metaplectic-check";
      return cmd_metaplectic_check(cfg);
    }
    if (cov->parsed()) {
      cfg.command = "covariance";
      return cmd_covariance(cfg, sigma_text, vtau_mode, grid_size);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace zflow
