#include "infoscribe/raster.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "infoscribe/errors.hpp"

namespace infoscribe {

namespace {

bool is_pnm_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Cursor over the header bytes. Tokens are separated by whitespace runs;
// '#' starts a comment that runs to end-of-line.
struct HeaderCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      if (is_pnm_space(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  std::string next_token() {
    skip_space_and_comments();
    std::string tok;
    while (pos < bytes.size() && !is_pnm_space(bytes[pos]) && bytes[pos] != '#') {
      tok.push_back(static_cast<char>(bytes[pos]));
      ++pos;
    }
    if (tok.empty()) throw MalformedHeader("unexpected end of header");
    return tok;
  }

  long next_int(const char* what) {
    std::string tok = next_token();
    for (char c : tok) {
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw MalformedHeader(std::string("non-numeric ") + what + ": '" + tok + "'");
    }
    if (tok.size() > 9) throw MalformedHeader(std::string(what) + " out of range: '" + tok + "'");
    return std::strtol(tok.c_str(), nullptr, 10);
  }
};

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  long v = std::lround(0.299 * r + 0.587 * g + 0.114 * b);
  if (v < 0) v = 0;
  if (v > 255) v = 255;
  return static_cast<std::uint8_t>(v);
}

}  // namespace

Raster load_image(std::span<const std::uint8_t> bytes) {
  HeaderCursor cur{bytes};
  std::string magic = cur.next_token();
  int channels;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw MalformedHeader("unsupported magic '" + magic + "' (want P5 or P6)");
  }

  long w = cur.next_int("width");
  long h = cur.next_int("height");
  long maxval = cur.next_int("maxval");
  if (w < 1 || h < 1) throw MalformedHeader("image dimensions must be positive");
  if (w > (1 << 20) || h > (1 << 20) || w * h > (1L << 28))
    throw MalformedHeader("image dimensions unreasonably large");
  if (maxval != 255) throw MalformedHeader("maxval must be 255");

  // Exactly one whitespace byte separates the maxval token from the payload.
  if (cur.pos >= bytes.size() || !is_pnm_space(bytes[cur.pos]))
    throw MalformedHeader("missing separator before payload");
  ++cur.pos;

  std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() - cur.pos < need)
    throw TruncatedPayload("payload has " + std::to_string(bytes.size() - cur.pos) +
                           " bytes, need " + std::to_string(need));

  Raster r;
  r.width = static_cast<int>(w);
  r.height = static_cast<int>(h);
  r.pixels.resize(static_cast<std::size_t>(w) * h);
  const std::uint8_t* p = bytes.data() + cur.pos;
  if (channels == 1) {
    std::copy(p, p + need, r.pixels.begin());
  } else {
    for (std::size_t i = 0; i < r.pixels.size(); ++i)
      r.pixels[i] = luminance(p[3 * i], p[3 * i + 1], p[3 * i + 2]);
  }
  return r;
}

std::vector<std::uint8_t> save_image(const Raster& r) {
  char header[64];
  int n = std::snprintf(header, sizeof header, "P5\n%d %d\n255\n", r.width, r.height);
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(n) + r.pixels.size());
  out.insert(out.end(), header, header + n);
  out.insert(out.end(), r.pixels.begin(), r.pixels.end());
  return out;
}

Raster load_image_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return load_image(bytes);
}

void save_image_file(const Raster& r, const std::string& path) {
  std::vector<std::uint8_t> bytes = save_image(r);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for '" + path + "'");
}

}  // namespace infoscribe
