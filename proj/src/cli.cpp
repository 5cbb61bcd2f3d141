#include "magnus/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <variant>

#include "magnus/corpus.hpp"
#include "magnus/diagnostics.hpp"
#include "magnus/error.hpp"
#include "magnus/model_io.hpp"
#include "magnus/series.hpp"

namespace magnus::cli {

namespace {

using nlohmann::json;

// Column-oriented output table, written as CSV (header row) or one JSON
// object per line.
class Table {
 public:
  using Cell = std::variant<double, long, std::string>;

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw std::logic_error("table row width mismatch");
    rows_.push_back(std::move(row));
  }

  void write(std::ostream& os, Format format) const {
    if (format == Format::Csv) {
      for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
      os << "\n";
      for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) {
          if (c) os << ",";
          std::visit([&](const auto& v) { write_csv(os, v); }, row[c]);
        }
        os << "\n";
      }
      return;
    }
    for (const auto& row : rows_) {
      json obj = json::object();
      for (std::size_t c = 0; c < row.size(); ++c) {
        std::visit([&](const auto& v) { obj[columns_[c]] = to_json_value(v); }, row[c]);
      }
      os << obj.dump() << "\n";
    }
  }

 private:
  static void write_csv(std::ostream& os, double v) {
    if (std::isnan(v)) {
      os << "nan";
    } else {
      os << std::setprecision(17) << v;
    }
  }
  static void write_csv(std::ostream& os, long v) { os << v; }
  static void write_csv(std::ostream& os, const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) {
      os << v;
      return;
    }
    os << '"';
    for (char ch : v) os << (ch == '"' ? "\"\"" : std::string(1, ch));
    os << '"';
  }
  static json to_json_value(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
  static json to_json_value(long v) { return json(v); }
  static json to_json_value(const std::string& v) { return json(v); }

  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

struct Problem {
  std::string name;
  MatrixFunction function;
  std::optional<PiecewisePolyMatrix> polynomial;
  std::function<RealMatrix(double)> exact;
};

Problem load_problem(const RunConfig& cfg) {
  std::string name = cfg.example;
  if (name.empty() && cfg.model.rfind("examples:", 0) == 0) name = cfg.model.substr(9);
  if (!name.empty()) {
    Example e = example(name);
    return {e.name, e.function, e.polynomial, e.exact_solution};
  }
  if (cfg.model.empty()) throw InputError("a model is required: use --model <file> or --example <name>");
  auto a = read_model_file(cfg.model);
  return {cfg.model, MatrixFunction::from_polynomial(a), a, {}};
}

Complex kappa_of(const RunConfig& cfg) {
  if (cfg.alpha) return std::polar(1.0, *cfg.alpha);
  return {cfg.kappa_re, cfg.kappa_im};
}

std::string entry_name(const char* prefix, Eigen::Index i, Eigen::Index j) {
  return std::string(prefix) + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

// Writes the data table to --out when given, otherwise to out.
void emit_table(const Table& table, const RunConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) {
    table.write(out, cfg.format);
    return;
  }
  std::ofstream file(cfg.out);
  if (!file) throw InputError("cannot write '" + cfg.out + "'");
  table.write(file, cfg.format);
}

void print_poly_matrix(std::ostream& os, const PolyMatrix& m) {
  for (std::size_t i = 0; i < m.dim(); ++i) {
    os << "  [";
    for (std::size_t j = 0; j < m.dim(); ++j) os << (j ? ", " : "") << format_poly(m.entry(i, j));
    os << "]\n";
  }
}

void print_piecewise(std::ostream& os, const PiecewisePolyMatrix& a) {
  const auto& bp = a.breakpoints();
  for (std::size_t k = 0; k < a.segment_count(); ++k) {
    os << " on [" << format_rational(bp[k]) << ", " << format_rational(bp[k + 1]) << "]\n";
    print_poly_matrix(os, a.segments()[k]);
  }
}

double domain_end(const RunConfig& cfg, const Problem& p) { return cfg.t_max.value_or(p.function.t_end()); }

// ------------------------------------------------------------ commands

json cmd_examples(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.example.empty() || cfg.model.rfind("examples:", 0) == 0) {
    const std::string name = cfg.example.empty() ? cfg.model.substr(9) : cfg.example;
    const Example e = example(name);
    out << e.name << ": " << e.summary << "\n";
    out << "domain [" << e.function.t_begin() << ", " << e.function.t_end() << "]\n";
    if (e.numeric_only()) out << "numeric-only\n";
    out << e.definition;
    if (!e.definition.empty() && e.definition.back() != '\n') out << "\n";
    return {{"command", "examples"}, {"name", e.name}, {"numeric_only", e.numeric_only()}};
  }
  Table table({"name", "kind", "t_begin", "t_end", "summary"});
  for (const auto& name : example_names()) {
    const Example e = example(name);
    table.add({e.name, std::string(e.numeric_only() ? "numeric-only" : "polynomial"), e.function.t_begin(),
               e.function.t_end(), e.summary});
  }
  emit_table(table, cfg, out);
  return {{"command", "examples"}, {"count", static_cast<long>(example_names().size())}};
}

json cmd_terms(const RunConfig& cfg, std::ostream& out) {
  const Problem p = load_problem(cfg);
  if (!p.polynomial) {
    throw InputError("'" + p.name + "' is not piecewise polynomial, so its Magnus terms cannot be generated exactly");
  }
  const int order = cfg.order > 0 ? cfg.order : 4;
  const MagnusSeries s = magnus_terms(*p.polynomial, order);
  int nonzero = 0;
  for (int n = 1; n <= order; ++n) {
    if (!s.term(n).is_zero()) ++nonzero;
    out << "Omega_" << n;
    print_piecewise(out, s.term(n));
  }
  if (!cfg.out.empty()) {
    std::ofstream file(cfg.out);
    if (!file) throw InputError("cannot write '" + cfg.out + "'");
    file << format_series(s);
  }
  json summary{{"command", "terms"}, {"model", p.name}, {"order", order}, {"nonzero_terms", nonzero}};
  if (cfg.t) {
    Table table({"n", "t", "norm"});
    for (int n = 1; n <= order; ++n) table.add({static_cast<long>(n), *cfg.t, spectral_norm(s.term_value(n, *cfg.t))});
    table.write(out, cfg.format);
  }
  return summary;
}

Table certificate_table() {
  std::vector<std::string> cols{"t", "gamma", "verdict"};
  for (const auto& [name, r] : convergence_thresholds()) cols.push_back("below_" + name);
  return Table(cols);
}

void add_certificate(Table& table, const Certificate& c) {
  std::vector<Table::Cell> row{c.t, c.gamma, to_string(c.verdict)};
  for (const auto& th : c.thresholds) row.emplace_back(static_cast<long>(th.pass));
  table.add(row);
}

json cmd_certify(const RunConfig& cfg, std::ostream& out) {
  const Problem p = load_problem(cfg);
  Table table = certificate_table();
  json summary{{"command", "certify"}, {"model", p.name}};
  if (cfg.t) {
    const Certificate c = certify(p.function, *cfg.t);
    add_certificate(table, c);
    summary["t"] = c.t;
    summary["gamma"] = c.gamma;
    summary["verdict"] = to_string(c.verdict);
  } else {
    const double t_end = domain_end(cfg, p);
    const double t0 = p.function.t_begin();
    for (int k = 0; k <= cfg.samples; ++k) add_certificate(table, certify(p.function, t0 + (t_end - t0) * k / cfg.samples));
  }
  const auto crossing = action_crossing(p.function, std::numbers::pi);
  summary["pi_crossing"] = crossing ? json(*crossing) : json(nullptr);
  emit_table(table, cfg, out);
  return summary;
}

json cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const Problem p = load_problem(cfg);
  const double t = cfg.t ? *cfg.t : domain_end(cfg, p);
  const Complex kappa = kappa_of(cfg);
  const auto fs = fundamental_solution(p.function, kappa, t, cfg.tol);
  const ComplexMatrix& y = fs.values.back();
  Table table({"row", "col", "re", "im"});
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      table.add({static_cast<long>(i + 1), static_cast<long>(j + 1), y(i, j).real(), y(i, j).imag()});
    }
  }
  emit_table(table, cfg, out);
  json summary{{"command", "solve"},        {"model", p.name},
               {"t", t},                    {"kappa_re", kappa.real()},
               {"kappa_im", kappa.imag()},  {"accepted_steps", fs.stats.accepted},
               {"rejected_steps", fs.stats.rejected}};
  if (p.exact && kappa == Complex(1.0)) summary["exact_error"] = spectral_norm(ComplexMatrix(y - to_complex(p.exact(t))));
  return summary;
}

json cmd_radius(const RunConfig& cfg, std::ostream& out) {
  const Problem p = load_problem(cfg);
  if (!p.polynomial) throw InputError("'" + p.name + "' is not piecewise polynomial; radius needs exact terms");
  const int order = cfg.order > 0 ? cfg.order : 30;
  if (order < 20) throw InputError("radius needs --order of at least 20");
  const MagnusSeries s = magnus_terms(*p.polynomial, order);
  const double t0 = p.function.t_begin();
  const double t_end = domain_end(cfg, p);

  std::vector<int> orders;
  for (int n : {15, 20, 25, 30}) {
    if (n < order) orders.push_back(n);
  }
  orders.push_back(order);

  std::vector<std::string> cols{"t", "n", "radius", "partial_sum_norm", "log_norm"};
  const auto d = static_cast<Eigen::Index>(s.dim());
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) cols.push_back(entry_name("s", i, j));
  }
  Table table(cols);
  std::vector<double> grid;
  for (int k = 0; k <= cfg.samples; ++k) grid.push_back(t0 + (t_end - t0) * k / cfg.samples);
  const auto fs = fundamental_solution(p.function, 1.0, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const double radius = empirical_radius(s, t);
    double log_norm = std::numeric_limits<double>::quiet_NaN();
    try {
      log_norm = spectral_norm(logm_integral(fs.values[k]));
    } catch (const NegativeSpectrum&) {
    }
    for (int n : orders) {
      const RealMatrix ps = partial_sum(s, n, t);
      std::vector<Table::Cell> row{t, static_cast<long>(n), radius, spectral_norm(ps), log_norm};
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) row.emplace_back(ps(i, j));
      }
      table.add(row);
    }
  }
  emit_table(table, cfg, out);

  json summary{{"command", "radius"}, {"model", p.name}, {"order", order}};
  const double lo = t0 + (t_end - t0) / cfg.samples;
  const auto onset = radius_onset(s, lo, t_end, cfg.samples);
  summary["radius_onset"] = onset ? json(*onset) : json(nullptr);
  try {
    const auto ps_onset = partial_sum_onset(s, p.function, lo, t_end, order, 10, cfg.samples);
    summary["partial_sum_onset"] = ps_onset ? json(*ps_onset) : json(nullptr);
  } catch (const NegativeSpectrum&) {
    summary["partial_sum_onset"] = nullptr;
    summary["note"] = "log Y(t) left the principal branch before any blow-up";
  }
  return summary;
}

json event_json(const CollisionEvent& e) {
  json j{{"t_star", e.t_star},
         {"lambda_re", e.lambda_star.real()},
         {"lambda_im", e.lambda_star.imag()},
         {"tracks", {e.tracks.first + 1, e.tracks.second + 1}},
         {"gap", e.gap},
         {"algebraic_multiplicity", e.algebraic_multiplicity},
         {"geometric_multiplicity", e.geometric_multiplicity},
         {"defective", e.defective},
         {"unstable", e.unstable},
         {"winding", e.winding}};
  if (e.alternate_winding) j["alternate_winding"] = *e.alternate_winding;
  return j;
}

json cmd_trajectory(const RunConfig& cfg, std::ostream& out) {
  const Problem p = load_problem(cfg);
  const Complex kappa = kappa_of(cfg);
  const Trajectory tr = eigenvalue_tracks(p.function, kappa, domain_end(cfg, p), cfg.samples);
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 0; i < tr.tracks.size(); ++i) {
    cols.push_back("re" + std::to_string(i + 1));
    cols.push_back("im" + std::to_string(i + 1));
  }
  Table table(cols);
  for (std::size_t k = 0; k < tr.grid.size(); ++k) {
    std::vector<Table::Cell> row{tr.grid[k]};
    for (const auto& track : tr.tracks) {
      row.emplace_back(track[k].real());
      row.emplace_back(track[k].imag());
    }
    table.add(row);
  }
  emit_table(table, cfg, out);
  json events = json::array();
  bool negative_axis_collision = false;
  for (const auto& e : tr.events) {
    events.push_back(event_json(e));
    if (on_negative_axis(e.lambda_star, 1e-6)) negative_axis_collision = true;
  }
  return {{"command", "trajectory"},
          {"model", p.name},
          {"kappa_re", kappa.real()},
          {"kappa_im", kappa.imag()},
          {"samples", static_cast<long>(tr.grid.size())},
          {"ambiguous_steps", static_cast<long>(tr.ambiguous_steps.size())},
          {"negative_axis_collision", negative_axis_collision},
          {"events", events}};
}

json cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const Problem p = load_problem(cfg);
  const SweepResult r = kappa_sweep(p.function, domain_end(cfg, p), cfg.alpha_samples, cfg.samples);
  Table table({"alpha", "t_closest", "gap"});
  for (const auto& pt : r.grid) table.add({pt.alpha, pt.t_closest, pt.gap});
  emit_table(table, cfg, out);
  json collisions = json::array();
  for (const auto& [alpha, e] : r.collisions) {
    json j = event_json(e);
    j["alpha"] = alpha;
    collisions.push_back(j);
  }
  json summary{{"command", "sweep"}, {"model", p.name}, {"collisions", collisions}};
  if (r.event) {
    summary["alpha_star"] = *r.alpha_star;
    summary["t_star"] = r.event->t_star;
    summary["lambda_re"] = r.event->lambda_star.real();
    summary["lambda_im"] = r.event->lambda_star.imag();
    summary["conjectured_divergence_onset"] = r.event->t_star;
  } else {
    summary["alpha_star"] = nullptr;
    summary["conjectured_divergence_onset"] = nullptr;
  }
  return summary;
}

json cmd_bch(const RunConfig& cfg, std::ostream& out) {
  std::size_t dim = 2;
  std::vector<Rational> a1{Rational(1, 10), Rational(1, 5), 0, Rational(-1, 10)};
  std::vector<Rational> a2{0, Rational(1, 10), Rational(1, 5), 0};
  if (!cfg.a1.empty() || !cfg.a2.empty()) {
    if (cfg.a1.empty() || cfg.a2.empty()) throw InputError("bch needs both --a1 and --a2");
    std::size_t d2 = 0;
    a1 = parse_constant_matrix(cfg.a1, dim);
    a2 = parse_constant_matrix(cfg.a2, d2);
    if (d2 != dim) throw DimensionMismatch("--a1 and --a2 differ in dimension");
  }
  const int order = cfg.order > 0 ? cfg.order : 6;
  const MagnusSeries s = bch_terms(dim, a1, a2, order);
  const auto d = static_cast<Eigen::Index>(dim);
  RealMatrix sum = RealMatrix::Zero(d, d);
  for (int n = 1; n <= order; ++n) {
    const auto value = evaluate(s.term(n), Rational(2));
    out << "B_" << n << "\n";
    for (std::size_t i = 0; i < dim; ++i) {
      out << "  [";
      for (std::size_t j = 0; j < dim; ++j) out << (j ? ", " : "") << format_rational(value[i * dim + j]);
      out << "]\n";
    }
    sum += s.term_value(n, 2.0);
  }
  const RealMatrix m1 = PolyMatrix::constant(dim, a1).evaluate(0.0);
  const RealMatrix m2 = PolyMatrix::constant(dim, a2).evaluate(0.0);
  const ComplexMatrix product = expm(to_complex(m1)) * expm(to_complex(m2));
  const double residual = spectral_norm(ComplexMatrix(expm(to_complex(sum)) - product));
  return {{"command", "bch"}, {"order", order}, {"dim", static_cast<long>(dim)}, {"exp_residual", residual}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Magnus series terms, convergence certificates and eigenvalue-trajectory diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  std::string format = "csv";
  std::optional<double> t, t_max, alpha;
  app.add_option("--model", cfg.model, "model file, or examples:<name>");
  app.add_option("--example", cfg.example, "built-in example (ex1, ex2, ex3, ex4, bch)");
  app.add_option("--t", t, "evaluation time");
  app.add_option("--t-max", t_max, "end of the time range");
  app.add_option("--order", cfg.order, "number of Magnus terms")->check(CLI::PositiveNumber);
  app.add_option("--kappa-re", cfg.kappa_re, "real part of kappa");
  app.add_option("--kappa-im", cfg.kappa_im, "imaginary part of kappa");
  app.add_option("--alpha", alpha, "kappa = exp(i alpha); overrides --kappa-re/--kappa-im");
  app.add_option("--tol", cfg.tol, "integrator tolerance")->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out, "write the data table (terms: the exact series) to this file");
  app.add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json-lines"}));
  app.add_option("--samples", cfg.samples, "time samples")->check(CLI::Range(2, 1000000));
  app.add_option("--alpha-samples", cfg.alpha_samples, "alpha grid size for sweep")->check(CLI::Range(64, 1000000));
  app.add_option("--a1", cfg.a1, "bch: first matrix, rows separated by ';'");
  app.add_option("--a2", cfg.a2, "bch: second matrix");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"terms", "exact Magnus terms"},
      {"certify", "convergence certificate from int ||A||_2"},
      {"solve", "fundamental solution Y(t; kappa)"},
      {"radius", "empirical radius of convergence and partial sums"},
      {"trajectory", "eigenvalue tracks of Y(t; kappa) and collisions"},
      {"sweep", "search |kappa| = 1 for defective encircling collisions"},
      {"bch", "Baker-Campbell-Hausdorff terms via a two-piece generator"},
      {"examples", "list or describe built-in examples"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help_out, help_err;
    const int code = app.exit(e, help_out, help_err);
    out << help_out.str();
    err << help_err.str();
    if (code == 0) return 0;
    out << json{{"command", nullptr}, {"status", "input_error"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  cfg.t = t;
  cfg.t_max = t_max;
  cfg.alpha = alpha;
  cfg.format = format == "csv" ? Format::Csv : Format::JsonLines;

  try {
    json summary;
    if (cfg.command == "examples") summary = cmd_examples(cfg, out);
    else if (cfg.command == "terms") summary = cmd_terms(cfg, out);
    else if (cfg.command == "certify") summary = cmd_certify(cfg, out);
    else if (cfg.command == "solve") summary = cmd_solve(cfg, out);
    else if (cfg.command == "radius") summary = cmd_radius(cfg, out);
    else if (cfg.command == "trajectory") summary = cmd_trajectory(cfg, out);
    else if (cfg.command == "sweep") summary = cmd_sweep(cfg, out);
    else summary = cmd_bch(cfg, out);
    summary["status"] = "ok";
    out << summary.dump() << "\n";
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    out << json{{"command", cfg.command}, {"status", "input_error"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    out << json{{"command", cfg.command}, {"status", "numeric_error"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"magnus_cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace magnus::cli
