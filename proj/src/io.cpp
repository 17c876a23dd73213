#include "maskwarp/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "maskwarp/error.hpp"

namespace maskwarp {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- PNG

struct Decoded {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};

struct MemoryReader {
  const std::string* bytes;
  std::size_t offset;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* src = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (src->offset + count > src->bytes->size()) png_error(png, "truncated file");
  std::memcpy(out, src->bytes->data() + src->offset, count);
  src->offset += count;
}

void write_to_memory(png_structp png, png_bytep data, png_size_t count) {
  auto* dst = static_cast<std::string*>(png_get_io_ptr(png));
  dst->append(reinterpret_cast<const char*>(data), count);
}

void flush_noop(png_structp) {}

void silent_warning(png_structp, png_const_charp) {}

// libpng reports failures through longjmp, so everything that owns memory
// is created before setjmp and nothing with a destructor lives between the
// setjmp and a possible jump.
bool decode_png(const std::string& bytes, Decoded& out, std::string& error) {
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
    error = "not a PNG file";
    return false;
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, silent_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    error = "libpng initialisation failed";
    return false;
  }
  MemoryReader reader{&bytes, 0};
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    error = "corrupt PNG data";
    return false;
  }
  png_set_read_fn(png, &reader, read_from_memory);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out.height = static_cast<int>(png_get_image_height(png, info));
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.pixels.resize(stride * out.height);
  rows.resize(out.height);
  for (int r = 0; r < out.height; ++r) rows[r] = out.pixels.data() + stride * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_png(int height, int width, int channels, const std::vector<std::uint8_t>& pixels,
                std::string& out) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, silent_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r) {
    rows[r] = const_cast<png_bytep>(pixels.data()) + static_cast<std::size_t>(r) * width * channels;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, write_to_memory, flush_noop);
  png_set_IHDR(png, info, width, height, 8, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

Decoded load_png(const fs::path& path) {
  const std::string bytes = read_file(path);
  Decoded d;
  std::string error;
  if (!decode_png(bytes, d, error)) throw IoError(path.string() + ": " + error);
  if (d.height <= 0 || d.width <= 0) throw IoError(path.string() + ": empty image");
  return d;
}

void store_png(const fs::path& path, int height, int width, int channels,
               const std::vector<std::uint8_t>& pixels) {
  std::string bytes;
  if (!encode_png(height, width, channels, pixels, bytes)) {
    throw IoError(path.string() + ": PNG encoding failed");
  }
  write_file_atomic(path, bytes);
}

std::uint8_t luma8(const std::uint8_t* px) {
  return static_cast<std::uint8_t>(std::lround(0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]));
}

// ---------------------------------------------------------- binary codecs

constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f32(std::string& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

class ByteReader {
 public:
  ByteReader(std::string bytes, std::string what) : bytes_(std::move(bytes)), what_(std::move(what)) {}

  void magic(const char (&tag)[5]) {
    need(4);
    if (std::memcmp(bytes_.data(), tag, 4) != 0) throw IoError(what_ + ": bad magic, expected " + tag);
    pos_ = 4;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  const std::string& what() const noexcept { return what_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw IoError(what_ + ": truncated");
  }

  std::string bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string encode_field(const WarpField& field) {
  std::string out = "WFLD";
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(field.height()));
  put_u32(out, static_cast<std::uint32_t>(field.width()));
  for (double v : field.data()) put_f32(out, v);
  return out;
}

WarpField decode_field(std::string bytes, std::string what) {
  ByteReader in(std::move(bytes), std::move(what));
  in.magic("WFLD");
  if (const auto v = in.u32(); v != kVersion) {
    throw IoError(in.what() + ": unsupported WFLD version " + std::to_string(v));
  }
  const std::uint64_t h = in.u32();
  const std::uint64_t w = in.u32();
  if (in.remaining() != h * w * 8) throw IoError(in.what() + ": payload size does not match header");
  std::vector<double> data(h * w * 2);
  for (double& v : data) v = in.f32();
  try {
    return WarpField(static_cast<int>(h), static_cast<int>(w), std::move(data));
  } catch (const InvalidArgument& e) {
    throw IoError(in.what() + ": " + e.what());
  }
}

std::string encode_heads(const InterestHeads& heads) {
  std::string out = "SPHD";
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(heads.hc()));
  put_u32(out, static_cast<std::uint32_t>(heads.wc()));
  put_u32(out, static_cast<std::uint32_t>(heads.point_channels()));
  put_u32(out, static_cast<std::uint32_t>(heads.desc_channels()));
  put_u32(out, static_cast<std::uint32_t>(heads.cell_size()));
  for (double v : heads.point_head()) put_f32(out, v);
  for (double v : heads.desc_head()) put_f32(out, v);
  return out;
}

InterestHeads decode_heads(std::string bytes, std::string what) {
  ByteReader in(std::move(bytes), std::move(what));
  in.magic("SPHD");
  if (const auto v = in.u32(); v != kVersion) {
    throw IoError(in.what() + ": unsupported SPHD version " + std::to_string(v));
  }
  const std::uint64_t hc = in.u32();
  const std::uint64_t wc = in.u32();
  const std::uint64_t cp = in.u32();
  const std::uint64_t cd = in.u32();
  const std::uint32_t cell = in.u32();
  if (in.remaining() != hc * wc * (cp + cd) * 4) {
    throw IoError(in.what() + ": payload size does not match header");
  }
  std::vector<double> point(hc * wc * cp);
  std::vector<double> desc(hc * wc * cd);
  for (double& v : point) v = in.f32();
  for (double& v : desc) v = in.f32();
  try {
    return InterestHeads(static_cast<int>(hc), static_cast<int>(wc), static_cast<int>(cp),
                         static_cast<int>(cd), static_cast<int>(cell), std::move(point), std::move(desc));
  } catch (const InvalidArgument& e) {
    throw IoError(in.what() + ": " + e.what());
  }
}

std::string slurp(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::string bytes = slurp(in);
  if (in.bad()) throw IoError(path.string() + ": read failed");
  return bytes;
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw IoError(path.string() + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(path.string() + ": cannot move into place");
  }
}

ImageBuffer read_image(const fs::path& path) {
  const Decoded d = load_png(path);
  std::vector<double> data(d.pixels.size());
  std::transform(d.pixels.begin(), d.pixels.end(), data.begin(),
                 [](std::uint8_t v) { return v / 255.0; });
  return ImageBuffer(d.height, d.width, d.channels, std::move(data));
}

void write_image(const fs::path& path, const ImageBuffer& image) {
  const auto src = image.data();
  std::vector<std::uint8_t> pixels(src.size());
  std::transform(src.begin(), src.end(), pixels.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  store_png(path, image.height(), image.width(), image.channels(), pixels);
}

BinaryMask read_mask(const fs::path& path) {
  const Decoded d = load_png(path);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(d.height) * d.width);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const std::uint8_t* px = d.pixels.data() + i * d.channels;
    const std::uint8_t level = d.channels == 1 ? px[0] : luma8(px);
    bits[i] = level >= 128 ? 1 : 0;
  }
  return BinaryMask(d.height, d.width, std::move(bits));
}

void write_mask(const fs::path& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> pixels(mask.size());
  std::transform(mask.values().begin(), mask.values().end(), pixels.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
  store_png(path, mask.height(), mask.width(), 1, pixels);
}

LabelMask read_labels(const fs::path& path, const LabelColors& colors) {
  const Decoded d = load_png(path);
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(d.height) * d.width);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint8_t* px = d.pixels.data() + i * d.channels;
    const Rgb rgb = d.channels == 1 ? Rgb{px[0], px[0], px[0]} : Rgb{px[0], px[1], px[2]};
    if (const auto it = colors.find(rgb); it != colors.end()) {
      labels[i] = it->second;
    } else if (rgb == Rgb{0, 0, 0}) {
      labels[i] = 0;
    } else {
      std::ostringstream msg;
      msg << path.string() << ": colour (" << int(rgb[0]) << "," << int(rgb[1]) << "," << int(rgb[2])
          << ") at pixel " << i << " has no label";
      throw IoError(msg.str());
    }
  }
  return LabelMask(d.height, d.width, std::move(labels));
}

void write_field(std::ostream& out, const WarpField& field) {
  const std::string bytes = encode_field(field);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("WFLD write failed");
}

WarpField round_to_f32(const WarpField& field) {
  WarpField out = field;
  for (double& v : out.data()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

WarpField read_field(std::istream& in) { return decode_field(slurp(in), "WFLD stream"); }

void write_field(const fs::path& path, const WarpField& field) {
  write_file_atomic(path, encode_field(field));
}

WarpField read_field(const fs::path& path) { return decode_field(read_file(path), path.string()); }

void write_heads(std::ostream& out, const InterestHeads& heads) {
  const std::string bytes = encode_heads(heads);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("SPHD write failed");
}

InterestHeads read_heads(std::istream& in) { return decode_heads(slurp(in), "SPHD stream"); }

void write_heads(const fs::path& path, const InterestHeads& heads) {
  write_file_atomic(path, encode_heads(heads));
}

InterestHeads read_heads(const fs::path& path) { return decode_heads(read_file(path), path.string()); }

}  // namespace maskwarp
