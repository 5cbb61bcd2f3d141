#pragma once

// Command-line front end. run_cli() is the whole program minus main(), so
// tests can drive it in-process.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace magnus::cli {

enum class Format { Csv, JsonLines };

struct RunConfig {
  std::string command;
  std::string model;    // path, or "examples:<name>"
  std::string example;  // built-in name
  std::optional<double> t;
  std::optional<double> t_max;
  int order = 0;  // 0: command default
  double kappa_re = 1.0;
  double kappa_im = 0.0;
  std::optional<double> alpha;
  double tol = 1e-10;
  std::string out;
  Format format = Format::Csv;
  int samples = 200;
  int alpha_samples = 128;
  std::string a1;
  std::string a2;
};

/// Exit codes: 0 success, 1 input error, 2 numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace magnus::cli
