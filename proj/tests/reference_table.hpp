#pragma once

// Published modulus table: exponents, modulus, ln d_r and ln w_r for
// r = 2..5. A NaN work factor marks a cell left blank because d_5 = 1.

#include <array>
#include <cmath>
#include <limits>

namespace reference {

struct Row {
  unsigned a, b;
  const char* m;
  std::array<double, 4> ln_d;
  std::array<double, 4> ln_w;
};

inline constexpr double kBlank = std::numeric_limits<double>::quiet_NaN();

inline const std::array<Row, 6> kTable = {{
    {144, 432, "1811941545963463911360", {-36.48, -24.70, -13.61, -2.93}, {7.06, 12.88, 18.84, 24.47}},
    {288, 144, "7409469211410651840", {-31.39, -20.02, -9.35, 0.0}, {6.78, 12.47, 18.15, kBlank}},
    {144, 144, "38391032183474880", {-26.80, -16.11, -6.10, 0.0}, {6.39, 11.79, 17.08, kBlank}},
    {72, 216, "952177069640160", {-23.37, -13.61, -4.55, 0.0}, {6.38, 11.35, 16.14, kBlank}},
    {144, 48, "54610287600960", {-21.30, -11.67, -2.72, 0.0}, {6.00, 10.73, 15.63, kBlank}},
    {36, 108, "1099511627760", {-17.94, -8.85, -0.45, 0.0}, {5.71, 10.19, 14.80, kBlank}},
}};

}  // namespace reference
