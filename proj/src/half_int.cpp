#include "nanomag/half_int.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "nanomag/errors.hpp"

namespace nanomag {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw InvalidInput("not a half-integer: '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

HalfInt HalfInt::parse(std::string_view text) {
  const std::string whole(text);
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw InvalidInput("empty half-integer");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const int num = parse_int(text.substr(0, slash), whole);
    const int den = parse_int(text.substr(slash + 1), whole);
    if (den == 1) return HalfInt{2 * num};
    if (den == 2) return HalfInt{num};
    throw InvalidInput("denominator must be 1 or 2: '" + whole + "'");
  }
  if (text.find('.') != std::string_view::npos) {
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(std::string(text), &used);
      if (used != text.size()) throw InvalidInput("not a half-integer: '" + whole + "'");
    } catch (const std::logic_error&) {
      throw InvalidInput("not a half-integer: '" + whole + "'");
    }
    const double doubled = 2.0 * v;
    const double r = std::round(doubled);
    if (std::abs(doubled - r) > 1e-9) throw InvalidInput("not a multiple of 1/2: '" + whole + "'");
    return HalfInt{static_cast<int>(r)};
  }
  return HalfInt{2 * parse_int(text, whole)};
}

std::string HalfInt::str() const {
  if (twice % 2 == 0) return std::to_string(twice / 2);
  return std::to_string(twice) + "/2";
}

}  // namespace nanomag
