#ifndef DFD_IO_HPP
#define DFD_IO_HPP

// Image and depth-map files.
//
//  * Images: binary PGM (P5, maxval <= 65535, two big-endian bytes per sample
//    above 255) and 8- or 16-bit PNG (gray, gray+alpha, RGB, RGBA, palette).
//    Colour is reduced to luminance with weights 0.299 / 0.587 / 0.114; alpha
//    is ignored. Pixels are normalized by the maximum sample value.
//  * Depth maps: UTF-8 text. Line 1 is "rows cols", followed by `rows` lines of
//    `cols` space-separated decimal numbers (row-major, top to bottom). Written
//    values use the shortest representation that round-trips exactly.

#include <png.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dfd/errors.hpp"
#include "dfd/pipeline.hpp"
#include "dfd/raster.hpp"

namespace dfd::io {

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

namespace detail {

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline std::uint16_t to_word(double v) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

/// Packs samples at 8 bits, or 16 bits big-endian.
inline std::vector<unsigned char> pack_samples(const GrayImage& img, int bits) {
  std::vector<unsigned char> out;
  out.reserve(img.pixels().size() * static_cast<std::size_t>(bits / 8));
  for (double v : img.pixels().values()) {
    if (bits == 16) {
      const auto w = to_word(v);
      out.push_back(static_cast<unsigned char>(w >> 8));
      out.push_back(static_cast<unsigned char>(w & 0xff));
    } else {
      out.push_back(to_byte(v));
    }
  }
  return out;
}

/// Parses the whitespace/comment-separated header tokens of a PNM file.
class PnmHeader {
 public:
  PnmHeader(const std::vector<unsigned char>& bytes, const std::string& path)
      : bytes_(bytes), path_(path) {}

  unsigned next_uint() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + static_cast<unsigned>(bytes_[pos_] - '0');
      ++pos_;
    }
    if (pos_ == start) fail("expected an unsigned integer");
    return v;
  }

  /// Position of the raster after the single whitespace byte that ends the header.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing header terminator");
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw IoError(path_ + ": offset " + std::to_string(pos_) + ": " + msg);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string path_;
  std::size_t pos_ = 2;  // after the magic number
};

inline GrayImage decode_pgm(const std::vector<unsigned char>& bytes, const std::string& path) {
  PnmHeader h(bytes, path);
  const unsigned width = h.next_uint();
  const unsigned height = h.next_uint();
  const unsigned maxval = h.next_uint();
  if (width == 0 || height == 0) h.fail("zero image dimension");
  if (maxval == 0 || maxval > 65535) h.fail("maxval must be in 1..65535");
  const std::size_t start = h.raster_start();
  const std::size_t n = static_cast<std::size_t>(width) * height;
  const std::size_t sample = maxval > 255 ? 2 : 1;
  if (bytes.size() - start < n * sample) {
    throw IoError(path + ": offset " + std::to_string(bytes.size()) + ": raster truncated, expected " +
                  std::to_string(n * sample) + " bytes");
  }
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned s = sample == 2 ? (bytes[start + 2 * i] << 8) | bytes[start + 2 * i + 1]
                                   : bytes[start + i];
    if (s > maxval) {
      throw IoError(path + ": offset " + std::to_string(start + i * sample) + ": sample " +
                    std::to_string(s) + " exceeds maxval " + std::to_string(maxval));
    }
    v[i] = static_cast<double>(s) / maxval;
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(v));
}

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngBuffer {
  const std::vector<unsigned char>* bytes;
  std::size_t pos;
};

inline void png_read_from_buffer(png_structp png, png_bytep out, png_size_t len) {
  auto* buf = static_cast<PngBuffer*>(png_get_io_ptr(png));
  if (buf->pos + len > buf->bytes->size()) png_error(png, "unexpected end of PNG data");
  std::copy_n(buf->bytes->data() + buf->pos, len, out);
  buf->pos += len;
}

inline void png_error_to_exception(png_structp png, png_const_charp msg) {
  auto* where = static_cast<std::string*>(png_get_error_ptr(png));
  *where = msg;
  png_longjmp(png, 1);
}

inline GrayImage decode_png(const std::vector<unsigned char>& bytes, const std::string& path) {
  std::string error;
  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_to_exception, nullptr);
  if (!g.png) throw IoError(path + ": cannot initialise PNG reader");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError(path + ": cannot initialise PNG reader");

  PngBuffer buf{&bytes, 0};
  std::vector<unsigned char> raster;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int channels = 0;
  png_size_t stride = 0;
  // Everything libpng touches is declared above the jump target.
  if (setjmp(png_jmpbuf(g.png))) {
    throw IoError(path + ": offset " + std::to_string(buf.pos) + ": " + error);
  }
  png_set_read_fn(g.png, &buf, png_read_from_buffer);
  png_read_info(g.png, g.info);
  const int color = png_get_color_type(g.png, g.info);
  const int depth = png_get_bit_depth(g.png, g.info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(g.png);
  if (png_get_valid(g.png, g.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(g.png);
  png_read_update_info(g.png, g.info);
  width = png_get_image_width(g.png, g.info);
  height = png_get_image_height(g.png, g.info);
  channels = png_get_channels(g.png, g.info);
  const int bytes_per_sample = png_get_bit_depth(g.png, g.info) == 16 ? 2 : 1;
  const double full_scale = bytes_per_sample == 2 ? 65535.0 : 255.0;
  stride = png_get_rowbytes(g.png, g.info);
  raster.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = raster.data() + y * stride;
  png_read_image(g.png, rows.data());
  png_read_end(g.png, nullptr);

  std::vector<double> v(static_cast<std::size_t>(width) * height);
  for (png_uint_32 y = 0; y < height; ++y) {
    for (png_uint_32 x = 0; x < width; ++x) {
      const unsigned char* p = raster.data() + y * stride +
                               static_cast<std::size_t>(x) * channels * bytes_per_sample;
      auto at = [&](int c) -> double {
        return bytes_per_sample == 2 ? (p[2 * c] << 8) | p[2 * c + 1] : p[c];
      };
      const double lum = channels <= 2 ? at(0) : kLumaR * at(0) + kLumaG * at(1) + kLumaB * at(2);
      v[static_cast<std::size_t>(y) * width + x] = lum / full_scale;
    }
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(v));
}

inline void png_write_to_string(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), len);
}

inline void png_flush_noop(png_structp) {}

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

/// PNG with 1 (gray) or 3 (RGB) channels, rows packed; 16-bit samples are big-endian.
inline std::string encode_png(int width, int height, int channels,
                              const std::vector<unsigned char>& pixels, int bits = 8) {
  std::string error;
  std::string out;
  PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_to_exception, nullptr);
  if (!g.png) throw IoError("cannot initialise PNG writer");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError("cannot initialise PNG writer");
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(
        pixels.data() + static_cast<std::size_t>(y) * width * channels * (bits / 8));
  }
  if (setjmp(png_jmpbuf(g.png))) throw IoError("PNG encoding failed: " + error);
  png_set_write_fn(g.png, &out, png_write_to_string, png_flush_noop);
  png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bits,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);
  png_write_image(g.png, rows.data());
  png_write_end(g.png, nullptr);
  return out;
}

inline bool has_extension(const std::filesystem::path& p, std::string_view ext) {
  std::string e = p.extension().string();
  for (char& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e == ext;
}

}  // namespace detail

/// Loads a PGM (P5) or PNG image, detected by content.
inline GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_bytes(path);
  static constexpr std::array<unsigned char, 8> kPngMagic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
    return detail::decode_png(bytes, path.string());
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    return detail::decode_pgm(bytes, path.string());
  }
  throw IoError(path.string() + ": offset 0: unrecognised image format (expected P5 PGM or PNG)");
}

inline void require_sample_bits(int bits) {
  if (bits != 8 && bits != 16) throw ValidationError("sample bits must be 8 or 16");
}

inline std::string encode_pgm(const GrayImage& img, int bits = 8) {
  require_sample_bits(bits);
  const auto px = detail::pack_samples(img, bits);
  std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                    (bits == 16 ? "\n65535\n" : "\n255\n");
  out.append(px.begin(), px.end());
  return out;
}

/// Writes PNG for a `.png` path, binary PGM otherwise, at 8 or 16 bits per sample.
inline void save_image(const GrayImage& img, const std::filesystem::path& path, int bits = 8) {
  require_sample_bits(bits);
  if (detail::has_extension(path, ".png")) {
    detail::write_bytes(path, detail::encode_png(img.width(), img.height(), 1,
                                                 detail::pack_samples(img, bits), bits));
  } else {
    detail::write_bytes(path, encode_pgm(img, bits));
  }
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_exact(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

/// Tokenizer over a text file that reports line:column on failure.
class TextCursor {
 public:
  TextCursor(std::string text, std::string path) : text_(std::move(text)), path_(std::move(path)) {}

  /// Next whitespace-separated token; `newline_ok` controls whether line breaks
  /// may be skipped before it.
  std::string_view token(bool newline_ok = true) {
    skip(newline_ok);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
    if (pos_ == start) fail(at_line_end() ? "unexpected end of line" : "unexpected end of file");
    tok_line_ = line_;
    tok_col_ = col_ - static_cast<int>(pos_ - start);
    return std::string_view(text_).substr(start, pos_ - start);
  }

  double number(bool newline_ok = true) {
    const auto t = token(newline_ok);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      fail_at_token("not a decimal number: '" + std::string(t) + "'");
    }
    return v;
  }

  long integer(bool newline_ok = true) {
    const auto t = token(newline_ok);
    long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      fail_at_token("not an integer: '" + std::string(t) + "'");
    }
    return v;
  }

  /// Consumes trailing blanks and exactly one line break (or end of file).
  void end_line() {
    skip(false);
    if (pos_ < text_.size()) {
      if (text_[pos_] != '\n') fail("extra values on line");
      advance();
    }
  }

  void expect_end() {
    skip(true);
    if (pos_ < text_.size()) fail("trailing content after the last row");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw IoError(path_ + ":" + std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg);
  }

  [[noreturn]] void fail_at_token(const std::string& msg) const {
    throw IoError(path_ + ":" + std::to_string(tok_line_) + ":" + std::to_string(tok_col_) + ": " +
                  msg);
  }

 private:
  bool at_line_end() const { return pos_ >= text_.size() || text_[pos_] == '\n'; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip(bool newline_ok) {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n' && !newline_ok) return;
      advance();
    }
  }

  std::string text_;
  std::string path_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int tok_line_ = 1;
  int tok_col_ = 1;
};

/// Raw depth grid: values as stored, without the positivity invariant.
struct DepthGrid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
};

inline DepthGrid parse_depth_text(std::string text, const std::string& origin) {
  TextCursor cur(std::move(text), origin);
  DepthGrid g;
  const long rows = cur.integer();
  const long cols = cur.integer(false);
  if (rows < 1 || cols < 1) cur.fail_at_token("depth dimensions must be positive");
  cur.end_line();
  g.rows = static_cast<int>(rows);
  g.cols = static_cast<int>(cols);
  g.values.reserve(static_cast<std::size_t>(rows * cols));
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      const double v = cur.number(c == 0);
      if (!std::isfinite(v)) cur.fail_at_token("depth value is not finite");
      g.values.push_back(v);
    }
    cur.end_line();
  }
  cur.expect_end();
  return g;
}

inline DepthGrid load_depth_grid(const std::filesystem::path& path) {
  const auto bytes = detail::read_bytes(path);
  return parse_depth_text(std::string(bytes.begin(), bytes.end()), path.string());
}

/// Loads a depth map; every value must be > 0.
inline pipeline::DepthMap load_depth(const std::filesystem::path& path) {
  DepthGrid g = load_depth_grid(path);
  try {
    return pipeline::DepthMap(g.rows, g.cols, std::move(g.values));
  } catch (const ValidationError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline std::string format_depth(int rows, int cols, std::span<const double> values) {
  std::string out = std::to_string(rows) + " " + std::to_string(cols) + "\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c) out.push_back(' ');
      out += format_exact(values[static_cast<std::size_t>(r) * cols + c]);
    }
    out.push_back('\n');
  }
  return out;
}

inline void save_depth(const pipeline::DepthMap& depth, const std::filesystem::path& path) {
  detail::write_bytes(path, format_depth(depth.rows(), depth.cols(), depth.values()));
}

/// Depth rendered as 8-bit gray: d_min -> 0, d_max -> 255, linear in between.
/// Each cell becomes a `cell_w` x `cell_h` block.
inline GrayImage depth_visualization(const pipeline::DepthMap& depth, double d_min, double d_max,
                                     int cell_w = 1, int cell_h = 1) {
  if (!(d_max > d_min)) throw ValidationError("visualization needs d_max > d_min");
  if (cell_w < 1 || cell_h < 1) throw ValidationError("visualization cell size must be positive");
  Raster<double> r(depth.cols() * cell_w, depth.rows() * cell_h);
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) {
      const double v = depth(y / cell_h, x / cell_w);
      r(x, y) = std::clamp((v - d_min) / (d_max - d_min), 0.0, 1.0);
    }
  return GrayImage(std::move(r));
}

inline void save_pgm_visualization(const pipeline::DepthMap& depth, double d_min, double d_max,
                                   const std::filesystem::path& path, int cell_w = 1,
                                   int cell_h = 1) {
  detail::write_bytes(path, encode_pgm(depth_visualization(depth, d_min, d_max, cell_w, cell_h)));
}

inline void save_text(std::string_view text, const std::filesystem::path& path) {
  detail::write_bytes(path, text);
}

}  // namespace dfd::io

#endif  // DFD_IO_HPP
