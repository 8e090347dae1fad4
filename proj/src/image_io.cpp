#include <cctype>
#include <cstring>
#include <stdexcept>
#include <string>

#include "mvlm/image.hpp"
#include "mvlm/io.hpp"

namespace mvlm {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos, const std::string& context) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) {
    throw ParseError(context + ": unexpected end of header", static_cast<std::int64_t>(pos));
  }
  return bytes.substr(start, pos - start);
}

int parse_header_int(const std::string& token, const std::string& context) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw ParseError(context + ": bad header value '" + token + "'");
  }
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const Image8& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw InputError("write_ppm: image buffer does not match its dimensions");
  }
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  write_file(path, out);
}

Image8 read_ppm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::string context = "ppm " + path.string();
  std::size_t pos = 0;
  if (next_token(bytes, pos, context) != "P6") {
    throw ParseError(context + ": not a binary PPM (expected P6)", 0);
  }
  const int width = parse_header_int(next_token(bytes, pos, context), context);
  const int height = parse_header_int(next_token(bytes, pos, context), context);
  const int maxval = parse_header_int(next_token(bytes, pos, context), context);
  if (width <= 0 || height <= 0) {
    throw ParseError(context + ": non-positive dimensions");
  }
  if (maxval != 255) {
    throw ParseError(context + ": unsupported max value " + std::to_string(maxval));
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw ParseError(context + ": missing pixel-data separator", static_cast<std::int64_t>(pos));
  }
  ++pos;  // exactly one whitespace byte before the raster

  Image8 image(width, height);
  if (bytes.size() - pos != image.pixels.size()) {
    throw ParseError(context + ": pixel payload is " + std::to_string(bytes.size() - pos) +
                         " bytes, expected " + std::to_string(image.pixels.size()),
                     static_cast<std::int64_t>(pos));
  }
  std::memcpy(image.pixels.data(), bytes.data() + pos, image.pixels.size());
  return image;
}

}  // namespace mvlm
