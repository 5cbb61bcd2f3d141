#pragma once

// Textual model format for piecewise-polynomial matrices.
//
//   # comment
//   dim 2
//   breakpoints 0 1/2 2
//   segment
//   [2] [0 1]
//   [] [-1]
//   segment
//   ...
//
// One "segment" block per interval, each holding dim rows of dim
// bracketed coefficient lists in ascending powers of t. Coefficients are
// exact fractions ("-1/4"); decimal literals are accepted on input and
// converted exactly. format_model() emits the canonical form, which parses
// back to an identical value.

#include <iosfwd>
#include <string>
#include <string_view>

#include "magnus/polymat.hpp"

namespace magnus {

std::string format_model(const PiecewisePolyMatrix& a);
PiecewisePolyMatrix parse_model(std::string_view text);
PiecewisePolyMatrix read_model_file(const std::string& path);

/// Parses a constant matrix written as rows separated by ';' and entries by
/// ',' or whitespace, e.g. "0,1/4;-1/4,0".
std::vector<Rational> parse_constant_matrix(std::string_view text, std::size_t& dim);

namespace detail {
// Shared with the series reader: consumes a model block starting at
// `lines[pos]` and advances pos past it.
PiecewisePolyMatrix parse_model_block(const std::vector<std::string>& lines, std::size_t& pos);
std::vector<std::string> significant_lines(std::string_view text);
}  // namespace detail

}  // namespace magnus
