#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "io.hpp"
#include "shadowrt/asympt.hpp"
#include "shadowrt/errors.hpp"
#include "shadowrt/filling.hpp"
#include "shadowrt/fsl_model.hpp"
#include "shadowrt/geometry.hpp"
#include "shadowrt/sixj.hpp"

namespace {

using namespace shadowrt;
using cli::json;

struct Common {
  std::string input;
  int r = 0;
  int threads = 1;
  std::string precision = "double";
  std::string format = "json";
  std::string output;
  std::string colors;
  double tolerance = 1e-12;
  double angle_gate = 0.3;
  bool force = false;
};

int default_threads() {
  if (const char* env = std::getenv("SHADOWRT_THREADS")) {
    int t = std::atoi(env);
    if (t >= 1) return t;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

Precision parse_precision(const std::string& s) {
  if (s == "double") return Precision::standard;
  if (s == "extended") return Precision::extended;
  throw DomainError("UsageError", "--precision must be double or extended");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw DomainError("UsageError", "not an integer list: " + s);
    }
  }
  return out;
}

void require_odd_r(int r) {
  if (r < 3 || r % 2 == 0) throw DomainError("UsageError", "--r must be an odd integer >= 3");
}

void emit(const Common& c, const json& j, const std::string& csv = {}) {
  std::string text;
  if (c.format == "csv") {
    if (csv.empty()) throw DomainError("UsageError", "this command has no CSV form");
    text = csv;
  } else {
    text = j.dump(2) + "\n";
  }
  if (c.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw DomainError("IoError", "cannot write " + c.output);
    f << text;
  }
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

SolverOptions solver_options(const Common& c) {
  SolverOptions o;
  o.tolerance = c.tolerance;
  o.angle_gate = c.angle_gate;
  o.force = c.force;
  return o;
}

SurgeryPresentation surgery_of(const cli::InputDoc& in) {
  return make_surgery(in.presentation, in.filled, in.slopes);
}

std::vector<int> colors_of(const Common& c, const cli::InputDoc& in) {
  if (!c.colors.empty()) {
    auto v = parse_int_list(c.colors);
    if (static_cast<int>(v.size()) != in.presentation.n) {
      throw DomainError("UsageError", "--colors needs one entry per component");
    }
    return v;
  }
  if (in.colors) return *in.colors;
  throw DomainError("UsageError", "colors missing: pass --colors or add \"colors\" to the input");
}

// beta_I and alpha_J from the target cone angles: alpha = pi + mu theta / 2.
void angles_of(const cli::InputDoc& in, const SurgeryPresentation& s, std::vector<double>& beta,
               std::vector<double>& alpha) {
  if (!in.angles) throw DomainError("UsageError", "input has no \"angles\" block");
  const auto& a = *in.angles;
  auto angle = [&](int k) {
    auto uk = static_cast<std::size_t>(k);
    int mu = a.mu.empty() ? 1 : a.mu[uk];
    return kPi + mu * a.theta[uk] / 2.0;
  };
  for (const auto& f : s.filled) beta.push_back(angle(f.component));
  for (int j : unfilled_components(in.presentation, s)) alpha.push_back(angle(j));
}

GeometricSolution solve_geometry(const Common& c, const cli::InputDoc& in, const SurgeryPresentation& s) {
  std::vector<double> beta, alpha;
  angles_of(in, s, beta, alpha);
  std::vector<int> e = in.signs ? *in.signs : std::vector<int>(s.filled.size(), 1);
  return find_critical_point(in.presentation, s, e, beta, alpha, solver_options(c));
}

int run_sixj(const Common& c, bool via_ur) {
  require_odd_r(c.r);
  auto m = parse_int_list(c.colors);
  if (m.size() != 6) throw DomainError("UsageError", "--colors needs six entries");
  SixTuple t;
  std::copy(m.begin(), m.end(), t.m.begin());
  RootContext ctx(c.r, parse_precision(c.precision));
  json j = {{"r", c.r}, {"colors", m}};
  LogComplex v;
  if (via_ur) {
    auto u = sixj_via_ur(ctx, ContourSpec{}, t);
    v = u.value;
    j["fallback"] = u.fallback;
  } else {
    v = sixj(ctx, t);
  }
  j["value"] = cli::to_json(v);
  j["hyperideal"] = is_hyperideal_coloring(c.r, t);
  emit(c, j, "r,log_mag,phase\n" + std::to_string(c.r) + "," + num(v.log_mag()) + "," + num(v.arg()) + "\n");
  return 0;
}

int run_rt_fsl(const Common& c) {
  require_odd_r(c.r);
  auto in = cli::read_input(c.input);
  RootContext ctx(c.r, parse_precision(c.precision));
  auto m = colors_of(c, in);
  auto v = rt_fsl(ctx, in.presentation, Coloring{m});
  emit(c, {{"r", c.r}, {"colors", m}, {"value", cli::to_json(v)}},
       "r,log_mag,phase\n" + std::to_string(c.r) + "," + num(v.log_mag()) + "," + num(v.arg()) + "\n");
  return 0;
}

int run_rt_filled(const Common& c) {
  require_odd_r(c.r);
  auto in = cli::read_input(c.input);
  auto s = surgery_of(in);
  RootContext ctx(c.r, parse_precision(c.precision));
  auto m = colors_of(c, in);
  std::vector<int> n_i, m_j;
  for (const auto& f : s.filled) n_i.push_back(m[static_cast<std::size_t>(f.component)]);
  for (int j : unfilled_components(in.presentation, s)) m_j.push_back(m[static_cast<std::size_t>(j)]);
  FilledOptions opt;
  opt.threads = c.threads;
  auto res = rt_filled(ctx, in.presentation, s, n_i, m_j, opt);
  emit(c,
       {{"r", c.r}, {"colors", m}, {"value", cli::to_json(res.value)}, {"warnings", cli::to_json(res.warnings)}},
       "r,log_mag,phase\n" + std::to_string(c.r) + "," + num(res.value.log_mag()) + "," +
           num(res.value.arg()) + "\n");
  return 0;
}

int run_cf(const Common& c, const std::string& slope) {
  auto slash = slope.find('/');
  std::int64_t p = 0, q = 1;
  try {
    std::size_t used = 0;
    std::string ps = slope.substr(0, slash);
    p = std::stoll(ps, &used);
    if (used != ps.size()) throw std::invalid_argument(slope);
    if (slash != std::string::npos) {
      std::string qs = slope.substr(slash + 1);
      q = std::stoll(qs, &used);
      if (used != qs.size()) throw std::invalid_argument(slope);
    }
  } catch (const std::logic_error&) {
    throw DomainError("UsageError", "--slope must look like p/q");
  }
  auto cf = neg_cf(p, q);
  auto d = dual_slope(p, q);
  auto sum = cf_reciprocal_sum(cf_partials(cf));
  std::string cf_text;
  for (std::size_t i = 0; i < cf.size(); ++i) cf_text += (i ? ";" : "") + std::to_string(cf[i]);
  emit(c,
       {{"p", p},
        {"q", q},
        {"cf", cf},
        {"p_prime", d.p_prime},
        {"q_prime", d.q_prime},
        {"reciprocal_sum", {{"num", sum.num}, {"den", sum.den}}}},
       "p,q,cf,p_prime,q_prime\n" + std::to_string(p) + "," + std::to_string(q) + "," + cf_text + "," +
           std::to_string(d.p_prime) + "," + std::to_string(d.q_prime) + "\n");
  return 0;
}

int run_geom(const Common& c, bool with_torsion) {
  auto in = cli::read_input(c.input);
  auto s = surgery_of(in);
  auto sol = solve_geometry(c, in, s);
  json j = {{"solution", cli::to_json(sol)}};
  if (with_torsion) j["torsion"] = cli::to_json(torsion(in.presentation, s, sol));
  emit(c, j);
  return 0;
}

int run_verify(const Common& c, int r_min, int r_max, const std::string& csv_path) {
  auto in = cli::read_input(c.input);
  auto s = surgery_of(in);
  if (!in.angles) throw DomainError("UsageError", "input has no \"angles\" block");
  if (r_min % 2 == 0) ++r_min;
  if (r_min < 5 || r_max < r_min) throw DomainError("UsageError", "need 5 <= r-min <= r-max");
  std::vector<int> rs;
  for (int r = r_min; r <= r_max; r += 2) rs.push_back(r);
  VerifyOptions opt;
  opt.threads = c.threads;
  opt.precision = parse_precision(c.precision);
  opt.solver = solver_options(c);
  auto rep = verify(in.presentation, s, *in.angles, rs, opt);
  std::string csv = report_csv(rep);
  if (!csv_path.empty()) {
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw DomainError("IoError", "cannot write " + csv_path);
    f << csv;
  }
  emit(c, cli::to_json(rep), csv);
  return 0;
}

void report_error(const std::string& code, const std::string& what) {
  json j = {{"error", code}, {"message", what}};
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum invariants of fundamental shadow links and their fillings"};
  app.require_subcommand(1);
  Common c;
  c.threads = default_threads();

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", c.threads, "worker threads (default: SHADOWRT_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--precision", c.precision, "double or extended")
        ->check(CLI::IsMember({"double", "extended"}));
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--output,-o", c.output, "write the report here instead of stdout");
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--tolerance", c.tolerance, "Newton residual tolerance");
    sub->add_option("--angle-gate", c.angle_gate, "largest |angle - pi| accepted without --force");
    sub->add_flag("--force", c.force, "skip the small-angle gate");
  };

  bool via_ur = false;
  auto* sixj_cmd = app.add_subcommand("sixj", "quantum 6j-symbol of one coloring");
  sixj_cmd->add_option("--r", c.r, "odd level")->required();
  sixj_cmd->add_option("--colors", c.colors, "six comma-separated even colors")->required();
  sixj_cmd->add_flag("--via-ur", via_ur, "use the quantum dilogarithm representation");
  add_common(sixj_cmd);

  auto* fsl_cmd = app.add_subcommand("rt-fsl", "invariant of the unfilled pair");
  fsl_cmd->add_option("--input", c.input, "presentation JSON")->required();
  fsl_cmd->add_option("--r", c.r, "odd level")->required();
  fsl_cmd->add_option("--colors", c.colors, "one color per component (overrides the input)");
  add_common(fsl_cmd);

  auto* filled_cmd = app.add_subcommand("rt-filled", "invariant of the filled pair");
  filled_cmd->add_option("--input", c.input, "presentation JSON")->required();
  filled_cmd->add_option("--r", c.r, "odd level")->required();
  filled_cmd->add_option("--colors", c.colors, "one color per component (overrides the input)");
  add_common(filled_cmd);

  std::string slope;
  auto* cf_cmd = app.add_subcommand("cf", "negative continued fraction and dual slope");
  cf_cmd->add_option("--slope", slope, "p/q")->required();
  add_common(cf_cmd);

  auto* geom_cmd = app.add_subcommand("geom-solve", "cone structure of the filled pair");
  geom_cmd->add_option("--input", c.input, "presentation JSON")->required();
  add_common(geom_cmd);
  add_solver(geom_cmd);

  auto* tor_cmd = app.add_subcommand("torsion", "cone structure plus twisted torsion");
  tor_cmd->add_option("--input", c.input, "presentation JSON")->required();
  add_common(tor_cmd);
  add_solver(tor_cmd);

  int r_min = 0, r_max = 0;
  std::string csv_path;
  auto* ver_cmd = app.add_subcommand("verify", "compare invariants with the predicted asymptotics");
  ver_cmd->add_option("--input", c.input, "presentation JSON")->required();
  ver_cmd->add_option("--r-min", r_min, "smallest odd r")->required();
  ver_cmd->add_option("--r-max", r_max, "largest odd r")->required();
  ver_cmd->add_option("--csv", csv_path, "also write the per-r CSV here");
  add_common(ver_cmd);
  add_solver(ver_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return 1;
  }

  try {
    if (*sixj_cmd) return run_sixj(c, via_ur);
    if (*fsl_cmd) return run_rt_fsl(c);
    if (*filled_cmd) return run_rt_filled(c);
    if (*cf_cmd) return run_cf(c, slope);
    if (*geom_cmd) return run_geom(c, false);
    if (*tor_cmd) return run_geom(c, true);
    if (*ver_cmd) return run_verify(c, r_min, r_max, csv_path);
  } catch (const SolverError& e) {
    report_error(e.code(), e.what());
    return 2;
  } catch (const InvariantViolation& e) {
    report_error(e.code(), e.what());
    return 2;
  } catch (const Error& e) {
    report_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return 2;
  }
  return 0;
}
