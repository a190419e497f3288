#include "dwt/io.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dwt {

namespace {

static_assert(sizeof(float) == 4);

[[noreturn]] void parse_error(std::size_t offset, const std::string& what) {
  throw Error(ErrorKind::Parse, what + " at byte offset " + std::to_string(offset));
}

// Minimal Netpbm header tokenizer: whitespace and '#' comments between tokens.
class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) parse_error(start, "unexpected end of header");
    return bytes_.substr(start, pos_ - start);
  }

  long integer(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    const std::string_view t = token();
    long value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      parse_error(start, std::string("invalid ") + what);
    }
    return value;
  }

  // Exactly one whitespace byte separates the header from binary data.
  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      parse_error(pos_, "expected whitespace after header");
    }
    ++pos_;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t float_bits_le(float v) { return std::bit_cast<std::uint32_t>(v); }

}  // namespace

Image<std::uint8_t> parse_pgm(std::string_view bytes, double spacing) {
  HeaderReader header(bytes);
  const std::string_view magic = header.token();
  if (magic != "P5" && magic != "P2") parse_error(0, "not a PGM file (expected P5 or P2)");
  const bool binary = magic == "P5";

  std::size_t field_offset = header.offset();
  const long width = header.integer("width");
  if (width < 1) parse_error(field_offset, "width must be >= 1");
  field_offset = header.offset();
  const long height = header.integer("height");
  if (height < 1) parse_error(field_offset, "height must be >= 1");
  field_offset = header.offset();
  const long maxval = header.integer("maxval");
  if (maxval < 1 || maxval > 255) parse_error(field_offset, "maxval must be in [1, 255]");

  GridGeometry g{static_cast<int>(width), static_cast<int>(height), spacing};
  g.validate();
  Image<std::uint8_t> image(g);

  if (binary) {
    header.single_whitespace();
    const std::size_t start = header.offset();
    const std::size_t needed = g.pixel_count();
    if (bytes.size() - start < needed) {
      parse_error(bytes.size(), "truncated pixel data: expected " + std::to_string(needed) +
                                    " bytes, found " + std::to_string(bytes.size() - start));
    }
    std::memcpy(image.pixels().data(), bytes.data() + start, needed);
    for (std::size_t i = 0; i < needed; ++i) {
      if (image[i] > maxval) parse_error(start + i, "sample exceeds maxval");
    }
  } else {
    for (std::size_t i = 0; i < g.pixel_count(); ++i) {
      header.skip_space_and_comments();
      if (header.offset() >= bytes.size()) parse_error(bytes.size(), "truncated pixel data");
      const std::size_t at = header.offset();
      const long v = header.integer("sample");
      if (v < 0 || v > maxval) parse_error(at, "sample out of range");
      image[i] = static_cast<std::uint8_t>(v);
    }
  }
  return image;
}

std::string encode_pgm(const Image<std::uint8_t>& image) {
  std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels().data()), image.size());
  return out;
}

BinaryMask load_mask(std::string_view bytes, double spacing) {
  const Image<std::uint8_t> gray = parse_pgm(bytes, spacing);
  BinaryMask mask(gray.geometry());
  for (int y = 0; y < gray.height(); ++y) {
    for (int x = 0; x < gray.width(); ++x) mask.set_wall(x, y, gray(x, y) > 0);
  }
  return mask;
}

std::string encode_mask(const BinaryMask& mask) {
  Image<std::uint8_t> gray(mask.geometry());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask.is_wall(i) ? 255 : 0;
  return encode_pgm(gray);
}

Image<BoundaryLabel> load_boundary_labels(std::string_view bytes) {
  const Image<std::uint8_t> gray = parse_pgm(bytes, 1.0);
  Image<BoundaryLabel> labels(gray.geometry(), BoundaryLabel::none);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    switch (gray[i]) {
      case 0: break;
      case 128: labels[i] = BoundaryLabel::inner; break;
      case 255: labels[i] = BoundaryLabel::outer; break;
      default:
        throw Error(ErrorKind::Parse, "boundary label value " + std::to_string(gray[i]) +
                                          " at pixel " + std::to_string(i) +
                                          " (expected 0, 128 or 255)");
    }
  }
  return labels;
}

std::string encode_boundary_labels(const Image<BoundaryLabel>& labels) {
  Image<std::uint8_t> gray(labels.geometry(), 0);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    if (labels[i] == BoundaryLabel::inner) gray[i] = 128;
    if (labels[i] == BoundaryLabel::outer) gray[i] = 255;
  }
  return encode_pgm(gray);
}

std::string encode_pfm(const Image<float>& image) {
  std::string out = "Pf\n" + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + image.size() * 4);
  char* dst = out.data() + header;
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) {
      const std::uint32_t bits = float_bits_le(image(x, y));
      for (int b = 0; b < 4; ++b) *dst++ = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
  }
  return out;
}

Image<float> parse_pfm(std::string_view bytes, double spacing) {
  HeaderReader header(bytes);
  const std::string_view magic = header.token();
  if (magic == "PF") parse_error(0, "colour PFM not supported (expected Pf)");
  if (magic != "Pf") parse_error(0, "not a greyscale PFM file (expected Pf)");
  std::size_t field_offset = header.offset();
  const long width = header.integer("width");
  if (width < 1) parse_error(field_offset, "width must be >= 1");
  field_offset = header.offset();
  const long height = header.integer("height");
  if (height < 1) parse_error(field_offset, "height must be >= 1");

  header.skip_space_and_comments();
  field_offset = header.offset();
  const std::string_view scale_token = header.token();
  double scale = 0.0;
  try {
    scale = std::stod(std::string(scale_token));
  } catch (const std::exception&) {
    parse_error(field_offset, "invalid scale/endianness field");
  }
  if (scale == 0.0) parse_error(field_offset, "scale must be nonzero");
  const bool little_endian = scale < 0.0;
  header.single_whitespace();

  GridGeometry g{static_cast<int>(width), static_cast<int>(height), spacing};
  g.validate();
  const std::size_t start = header.offset();
  const std::size_t needed = g.pixel_count() * 4;
  if (bytes.size() - start < needed) parse_error(bytes.size(), "truncated float data");

  Image<float> image(g);
  const auto* src = reinterpret_cast<const unsigned char*>(bytes.data() + start);
  for (int y = g.height - 1; y >= 0; --y) {
    for (int x = 0; x < g.width; ++x) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const int shift = little_endian ? 8 * b : 8 * (3 - b);
        bits |= static_cast<std::uint32_t>(src[b]) << shift;
      }
      src += 4;
      image(x, y) = std::bit_cast<float>(bits);
    }
  }
  return image;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "read failed: " + path.string());
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open for writing " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

double parse_spacing_sidecar(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("spacing sidecar: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("spacing_mm") || !doc["spacing_mm"].is_number()) {
    throw Error(ErrorKind::Parse, "spacing sidecar lacks numeric \"spacing_mm\"");
  }
  const double spacing = doc["spacing_mm"].get<double>();
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorKind::Domain, "spacing_mm must be positive");
  }
  return spacing;
}

}  // namespace dwt
