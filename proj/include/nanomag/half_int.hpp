#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace nanomag {

/// A half-integer stored as twice its value, so 3/2 is held as 3.
struct HalfInt {
  int twice = 0;

  constexpr HalfInt() = default;
  constexpr explicit HalfInt(int twice_value) : twice(twice_value) {}

  static constexpr HalfInt from_int(int value) { return HalfInt{2 * value}; }

  /// Accepts "3/2", "-1/2", "1.5", "2" and rejects anything that is not a
  /// multiple of 1/2.
  static HalfInt parse(std::string_view text);

  constexpr double value() const { return 0.5 * twice; }
  constexpr bool is_integer() const { return twice % 2 == 0; }

  /// "3/2", "-1/2", "2".
  std::string str() const;

  constexpr HalfInt operator-() const { return HalfInt{-twice}; }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt{twice + o.twice}; }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt{twice - o.twice}; }
  constexpr auto operator<=>(const HalfInt&) const = default;
};

/// s(s+1) for a half-integer s.
constexpr double spin_casimir(HalfInt s) { return 0.25 * s.twice * (s.twice + 2); }

}  // namespace nanomag
