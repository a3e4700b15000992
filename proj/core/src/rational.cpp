#include "dilemma/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace dilemma {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::int64_t pow10(int n) {
  std::int64_t v = 1;
  while (n-- > 0) v *= 10;
  return v;
}

}  // namespace

std::optional<Rat> parse_rational(const std::string& text) {
  std::string s = text;
  // trim
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.empty()) return std::nullopt;

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.erase(s.begin());
  }

  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return std::nullopt;
    std::int64_t d = std::strtoll(den.c_str(), nullptr, 10);
    if (d == 0) return std::nullopt;
    Rat r(std::strtoll(num.c_str(), nullptr, 10), d);
    return negative ? -r : r;
  }

  auto dot = s.find('.');
  std::string whole = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  if (!whole.empty() && !all_digits(whole)) return std::nullopt;
  if (!frac.empty() && !all_digits(frac)) return std::nullopt;
  if (frac.size() > 15) return std::nullopt;

  std::int64_t ipart = whole.empty() ? 0 : std::strtoll(whole.c_str(), nullptr, 10);
  Rat r(ipart, 1);
  if (!frac.empty()) {
    std::int64_t scale = pow10(static_cast<int>(frac.size()));
    r += Rat(std::strtoll(frac.c_str(), nullptr, 10), scale);
  }
  return negative ? -r : r;
}

std::optional<Rat> rational_from_double(double value) {
  if (!std::isfinite(value)) return std::nullopt;
  for (int digits = 0; digits <= 9; ++digits) {
    const double scale = static_cast<double>(pow10(digits));
    const double scaled = value * scale;
    if (std::abs(scaled) > 9.0e15) return std::nullopt;
    const double rounded = std::nearbyint(scaled);
    if (rounded / scale == value) {
      return Rat(static_cast<std::int64_t>(rounded), pow10(digits));
    }
  }
  return std::nullopt;
}

double to_double(const Rat& r) {
  return boost::rational_cast<double>(r);
}

std::string to_display_string(const Rat& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());

  // Exact decimal when the denominator is of the form 2^a * 5^b.
  std::int64_t den = r.denominator();
  int twos = 0;
  int fives = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++fives;
  }
  if (den == 1) {
    const int digits = std::max(twos, fives);
    if (digits <= 15) {
      Rat scaled = r * Rat(pow10(digits), 1);
      std::int64_t units = scaled.numerator();  // scaled is integral here
      const bool neg = units < 0;
      if (neg) units = -units;
      std::string ds = std::to_string(units);
      if (static_cast<int>(ds.size()) <= digits) {
        ds.insert(ds.begin(), digits + 1 - ds.size(), '0');
      }
      ds.insert(ds.size() - digits, ".");
      // strip trailing zeros, keep at least one fractional digit
      while (ds.back() == '0' && ds[ds.size() - 2] != '.') ds.pop_back();
      return (neg ? "-" : "") + ds;
    }
  }
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace dilemma
