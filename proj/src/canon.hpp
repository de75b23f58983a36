#pragma once

// Internal helpers for the canonical text forms: fixed-precision reals and
// minimal JSON string escaping. Both file formats demand byte-identical
// output for equal values, so all real-valued attributes are quantized to
// the same 6-decimal grid they are printed with.

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

namespace infoscribe::canon {

inline double quantize6(double v) {
  const double q = std::llround(v * 1e6) / 1e6;
  return q == 0.0 ? 0.0 : q;  // normalize -0
}

// For quantities contracted to (0,1]: tiny positive values must not quantize
// to zero (a one-pixel region in a multi-megapixel level, say).
inline double positive6(double v) {
  const double q = quantize6(v);
  return q < 1e-6 ? 1e-6 : q;
}

inline std::string real6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void append_json_string(std::string& out, std::string_view s) {
  out.push_back('"');
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
}

}  // namespace infoscribe::canon
