#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace dilemma {

/// Exact rational number of points. Game payoffs are carried as rationals so
/// derived quantities (mixed-equilibrium probabilities, scaled payoffs) stay
/// exact and tests can assert equality instead of tolerances.
using Rat = boost::rational<std::int64_t>;

/// Parses a decimal literal ("3", "-2.5", "1/6") into an exact rational.
/// Returns nullopt for anything else (exponents, inf, nan, garbage).
std::optional<Rat> parse_rational(const std::string& text);

/// Exact conversion of a double that carries a short decimal representation
/// (up to 9 fractional digits). Returns nullopt when no such representation
/// round-trips to the input, e.g. for 1/3 computed in floating point.
std::optional<Rat> rational_from_double(double value);

double to_double(const Rat& r);

/// Renders a rational for prompt substitution and reports: integers without a
/// decimal point ("10"), dyadic/decimal values as exact decimals ("2.5"),
/// anything else as "n/d".
std::string to_display_string(const Rat& r);

}  // namespace dilemma
