#include "magnus/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "magnus/error.hpp"

namespace magnus {

namespace detail {

std::vector<std::string> significant_lines(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(first, last - first + 1));
  }
  return out;
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

// "[a b c] [] [d]" -> list of coefficient lists.
std::vector<Poly> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<Poly> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t') {
      ++i;
      continue;
    }
    if (line[i] != '[') throw ParseError("line " + std::to_string(line_no) + ": expected '['");
    const auto close = line.find(']', i);
    if (close == std::string::npos) throw ParseError("line " + std::to_string(line_no) + ": missing ']'");
    std::string inner = line.substr(i + 1, close - i - 1);
    for (auto& ch : inner) {
      if (ch == ',') ch = ' ';
    }
    std::vector<Rational> coeffs;
    for (const auto& tok : split_ws(inner)) coeffs.push_back(parse_rational(tok));
    out.emplace_back(std::move(coeffs));
    i = close + 1;
  }
  return out;
}

std::size_t parse_count(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0) throw ParseError(std::string("invalid ") + what + " '" + tok + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw ParseError(std::string("invalid ") + what + " '" + tok + "'");
  }
}

}  // namespace

PiecewisePolyMatrix parse_model_block(const std::vector<std::string>& lines, std::size_t& pos) {
  auto expect_key = [&](const char* key) -> std::vector<std::string> {
    if (pos >= lines.size()) throw ParseError(std::string("unexpected end of model, expected '") + key + "'");
    auto toks = split_ws(lines[pos]);
    if (toks.empty() || toks[0] != key) {
      throw ParseError(std::string("expected '") + key + "', found '" + lines[pos] + "'");
    }
    ++pos;
    return toks;
  };

  const auto dim_toks = expect_key("dim");
  if (dim_toks.size() != 2) throw ParseError("'dim' takes exactly one value");
  const std::size_t dim = parse_count(dim_toks[1], "dim");

  const auto bp_toks = expect_key("breakpoints");
  std::vector<Rational> breakpoints;
  for (std::size_t k = 1; k < bp_toks.size(); ++k) breakpoints.push_back(parse_rational(bp_toks[k]));
  if (breakpoints.size() < 2) throw ParseError("need at least two breakpoints");

  std::vector<PolyMatrix> segments;
  while (pos < lines.size() && split_ws(lines[pos]).front() == "segment") {
    ++pos;
    std::vector<Poly> entries;
    for (std::size_t r = 0; r < dim; ++r) {
      if (pos >= lines.size()) throw ParseError("segment ended after " + std::to_string(r) + " rows");
      auto row = parse_row(lines[pos], pos + 1);
      if (row.size() != dim) {
        throw ParseError("row '" + lines[pos] + "' has " + std::to_string(row.size()) + " entries, expected " +
                         std::to_string(dim));
      }
      for (auto& p : row) entries.push_back(std::move(p));
      ++pos;
    }
    segments.emplace_back(dim, entries);
  }
  if (segments.size() + 1 != breakpoints.size()) {
    throw ParseError("model has " + std::to_string(segments.size()) + " segments but " +
                     std::to_string(breakpoints.size()) + " breakpoints");
  }
  try {
    return PiecewisePolyMatrix(std::move(breakpoints), std::move(segments));
  } catch (const InputError& e) {
    throw ParseError(e.what());
  }
}

}  // namespace detail

std::string format_model(const PiecewisePolyMatrix& a) {
  std::ostringstream os;
  os << "dim " << a.dim() << '\n';
  os << "breakpoints";
  for (const auto& b : a.breakpoints()) os << ' ' << format_rational(b);
  os << '\n';
  for (const auto& seg : a.segments()) {
    os << "segment\n";
    for (std::size_t i = 0; i < a.dim(); ++i) {
      for (std::size_t j = 0; j < a.dim(); ++j) {
        if (j > 0) os << ' ';
        os << '[';
        const Poly p = seg.entry(i, j);
        for (std::size_t k = 0; k < p.coefficients().size(); ++k) {
          if (k > 0) os << ' ';
          os << format_rational(p.coefficients()[k]);
        }
        os << ']';
      }
      os << '\n';
    }
  }
  return os.str();
}

PiecewisePolyMatrix parse_model(std::string_view text) {
  const auto lines = detail::significant_lines(text);
  std::size_t pos = 0;
  auto model = detail::parse_model_block(lines, pos);
  if (pos != lines.size()) throw ParseError("trailing content after model: '" + lines[pos] + "'");
  return model;
}

PiecewisePolyMatrix read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::vector<Rational> parse_constant_matrix(std::string_view text, std::size_t& dim) {
  std::vector<std::vector<Rational>> rows;
  std::string s(text);
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(';', start);
    if (end == std::string::npos) end = s.size();
    std::string row = s.substr(start, end - start);
    for (auto& ch : row) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream in(row);
    std::vector<Rational> values;
    for (std::string tok; in >> tok;) values.push_back(parse_rational(tok));
    if (!values.empty()) rows.push_back(std::move(values));
    start = end + 1;
  }
  if (rows.empty()) throw ParseError("empty matrix literal");
  dim = rows.size();
  std::vector<Rational> out;
  for (const auto& r : rows) {
    if (r.size() != dim) throw ParseError("matrix literal is not square");
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace magnus
