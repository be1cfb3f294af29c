#include "iris/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "iris/errors.hpp"

namespace iris {

namespace {

// Next whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parse_int(const std::string& tok, const std::string& what,
              const std::string& path) {
  try {
    size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Io, "bad " + what + " in " + path);
  }
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  if (next_token(in) != "P5")
    throw Error(ErrorKind::Io, "not a binary PGM: " + path);
  const int w = parse_int(next_token(in), "width", path);
  const int h = parse_int(next_token(in), "height", path);
  const int maxval = parse_int(next_token(in), "maxval", path);
  if (w <= 0 || h <= 0)
    throw Error(ErrorKind::Io, "bad dimensions in " + path);
  if (maxval <= 0 || maxval > 255)
    throw Error(ErrorKind::Io, "unsupported maxval in " + path);
  // The header ends with exactly one whitespace byte, already consumed by
  // next_token's delimiter read.
  Image img(h, w);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw Error(ErrorKind::Io, "truncated pixel data in " + path);
  return img;
}

void write_pgm(const Image& img, const std::string& path) {
  if (img.height <= 0 || img.width <= 0)
    throw Error(ErrorKind::Validation, "cannot write empty image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for write");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

Tensor image_to_tensor(const Image& img) {
  Tensor t(1, img.height, img.width);
  for (size_t i = 0; i < img.pixels.size(); ++i)
    t.data[i] = img.pixels[i] / 255.0;
  return t;
}

BinaryMask image_to_mask(const Image& img) {
  BinaryMask m(img.height, img.width);
  for (size_t i = 0; i < img.pixels.size(); ++i)
    m.data[i] = img.pixels[i] != 0 ? 1 : 0;
  return m;
}

Image mask_to_image(const BinaryMask& mask) {
  Image img(mask.height, mask.width);
  for (size_t i = 0; i < mask.data.size(); ++i)
    img.pixels[i] = mask.data[i] ? 255 : 0;
  return img;
}

Image tensor_to_image(const Tensor& t) {
  if (t.channels != 1)
    throw Error(ErrorKind::Dimension, "expected single-channel tensor");
  Image img(t.height, t.width);
  for (size_t i = 0; i < t.data.size(); ++i) {
    const double v = std::clamp(t.data[i], 0.0, 1.0);
    img.pixels[i] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  return img;
}

}  // namespace iris
