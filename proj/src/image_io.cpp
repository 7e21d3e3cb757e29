#include "mldtv/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

namespace mldtv {

namespace {

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

constexpr const char* kPhysMinKey = "mldtv-physical-min";
constexpr const char* kPhysMaxKey = "mldtv-physical-max";

struct PgmHeader {
  int width = 0, height = 0, maxval = 0;
  std::optional<double> phys_min, phys_max;
};

// Reads one whitespace-delimited PGM token, consuming comments; comment
// lines of the form "# <key> <value>" feed the physical-range extension.
std::string next_pgm_token(std::istream& is, PgmHeader& hdr) {
  for (;;) {
    const int c = is.peek();
    if (c == EOF) throw std::runtime_error("PGM: truncated header");
    if (std::isspace(c)) {
      is.get();
      continue;
    }
    if (c == '#') {
      std::string line;
      std::getline(is, line);
      std::istringstream ls(line.substr(1));
      std::string key;
      double value;
      if (ls >> key >> value) {
        if (key == kPhysMinKey) hdr.phys_min = value;
        if (key == kPhysMaxKey) hdr.phys_max = value;
      }
      continue;
    }
    std::string tok;
    while (is.peek() != EOF && !std::isspace(is.peek())) tok.push_back(char(is.get()));
    return tok;
  }
}

ImageXd read_pgm(std::istream& is, const std::string& path) {
  char magic[2] = {0, 0};
  is.read(magic, 2);
  if (!is || magic[0] != 'P') throw std::runtime_error("unsupported format: " + path);
  if (magic[1] != '5')
    throw std::runtime_error("unsupported format (only binary P5 PGM): " + path);

  PgmHeader hdr;
  hdr.width = std::stoi(next_pgm_token(is, hdr));
  hdr.height = std::stoi(next_pgm_token(is, hdr));
  hdr.maxval = std::stoi(next_pgm_token(is, hdr));
  if (hdr.width <= 0 || hdr.height <= 0 || hdr.maxval <= 0 || hdr.maxval > 65535)
    throw std::runtime_error("PGM: bad header in " + path);
  is.get();  // single whitespace before raster

  const std::size_t n = std::size_t(hdr.width) * std::size_t(hdr.height);
  ImageXd img(hdr.height, hdr.width);
  if (hdr.maxval < 256) {
    std::vector<std::uint8_t> raw(n);
    is.read(reinterpret_cast<char*>(raw.data()), std::streamsize(n));
    if (!is) throw std::runtime_error("PGM: truncated raster in " + path);
    for (std::size_t i = 0; i < n; ++i)
      img.values.data()[i] = double(raw[i]) / double(hdr.maxval);
  } else {
    std::vector<std::uint8_t> raw(2 * n);  // big-endian 16-bit
    is.read(reinterpret_cast<char*>(raw.data()), std::streamsize(2 * n));
    if (!is) throw std::runtime_error("PGM: truncated raster in " + path);
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = (unsigned(raw[2 * i]) << 8) | unsigned(raw[2 * i + 1]);
      img.values.data()[i] = double(v) / double(hdr.maxval);
    }
  }
  if (hdr.phys_min && hdr.phys_max)
    img.values = *hdr.phys_min + img.values * (*hdr.phys_max - *hdr.phys_min);
  return img;
}

void write_pgm(const ImageXd& img, const std::string& path) {
  const double lo = img.values.minCoeff();
  const double hi = img.values.maxCoeff();
  const bool in_range = lo >= 0.0 && hi <= 1.0;

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "P5\n";
  ImageXd::Plane stored;
  if (in_range) {
    stored = img.values;
  } else {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "# %s %.17g\n# %s %.17g\n", kPhysMinKey, lo, kPhysMaxKey, hi);
    os << buf;
    stored = hi > lo ? ((img.values - lo) / (hi - lo)).eval()
                     : ImageXd::Plane::Zero(img.height(), img.width()).eval();
  }
  os << img.width() << " " << img.height() << "\n65535\n";
  const std::size_t n = std::size_t(img.size());
  std::vector<std::uint8_t> raw(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::clamp(stored.data()[i], 0.0, 1.0);
    const unsigned q = unsigned(std::lround(v * 65535.0));
    raw[2 * i] = std::uint8_t(q >> 8);
    raw[2 * i + 1] = std::uint8_t(q & 0xFF);
  }
  os.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(raw.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

ImageXd read_png(const std::string& path) {
  PngReadCloser ctx;
  ctx.fp = std::fopen(path.c_str(), "rb");
  if (!ctx.fp) throw std::runtime_error("cannot open: " + path);
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) throw std::runtime_error("libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw std::runtime_error("PNG decode failed: " + path);

  png_init_io(ctx.png, ctx.fp);
  png_read_info(ctx.png, ctx.info);
  const png_uint_32 w = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 h = png_get_image_height(ctx.png, ctx.info);
  const int color = png_get_color_type(ctx.png, ctx.info);
  int depth = png_get_bit_depth(ctx.png, ctx.info);
  if (color != PNG_COLOR_TYPE_GRAY)
    throw std::runtime_error("unsupported format (only grayscale PNG): " + path);
  if (depth < 8) {
    png_set_expand_gray_1_2_4_to_8(ctx.png);
    depth = 8;
  }
  png_read_update_info(ctx.png, ctx.info);

  const std::size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
  std::vector<std::uint8_t> raw(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * rowbytes;
  png_read_image(ctx.png, rows.data());

  ImageXd img(h, w);
  const double scale = depth == 16 ? 65535.0 : 255.0;
  for (png_uint_32 y = 0; y < h; ++y) {
    const std::uint8_t* row = rows[y];
    for (png_uint_32 x = 0; x < w; ++x) {
      const unsigned v = depth == 16 ? (unsigned(row[2 * x]) << 8) | unsigned(row[2 * x + 1])
                                     : unsigned(row[x]);
      img(y, x) = double(v) / scale;
    }
  }
  return img;
}

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_png(const ImageXd& img, const std::string& path) {
  PngWriteCloser ctx;
  ctx.fp = std::fopen(path.c_str(), "wb");
  if (!ctx.fp) throw std::runtime_error("cannot open for writing: " + path);
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) throw std::runtime_error("libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw std::runtime_error("PNG encode failed: " + path);

  png_init_io(ctx.png, ctx.fp);
  png_set_IHDR(ctx.png, ctx.info, png_uint_32(img.width()), png_uint_32(img.height()), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);

  std::vector<std::uint8_t> row(2 * std::size_t(img.width()));
  for (Eigen::Index y = 0; y < img.height(); ++y) {
    for (Eigen::Index x = 0; x < img.width(); ++x) {
      const double v = std::clamp(img(y, x), 0.0, 1.0);
      const unsigned q = unsigned(std::lround(v * 65535.0));
      row[2 * x] = std::uint8_t(q >> 8);
      row[2 * x + 1] = std::uint8_t(q & 0xFF);
    }
    png_write_row(ctx.png, row.data());
  }
  png_write_end(ctx.png, nullptr);
}

}  // namespace

ImageXd read_image(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "png") return read_png(path);
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  if (ext == "pgm") return read_pgm(is, path);
  // sniff the magic for extensionless paths
  if (is.peek() == 'P') return read_pgm(is, path);
  throw std::runtime_error("unsupported format: " + path);
}

void write_image(const ImageXd& img, const std::string& path) {
  if (img.size() == 0) throw std::invalid_argument("write_image: empty image");
  const std::string ext = lower_ext(path);
  if (ext == "pgm")
    write_pgm(img, path);
  else if (ext == "png")
    write_png(img, path);
  else
    throw std::runtime_error("unsupported format (use .pgm or .png): " + path);
}

}  // namespace mldtv
