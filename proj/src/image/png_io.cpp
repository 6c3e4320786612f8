#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "med/error.hpp"
#include "med/image_io.hpp"

namespace med {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

void on_error(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

// Decoded samples normalized to [0, 1], interleaved with `channels` per pixel.
struct Raw {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 gray, 2 gray+alpha, 3 rgb, 4 rgba
  int bit_depth = 8;
  std::vector<float> samples;
};

Raw decode(const std::filesystem::path& path) {
  FilePtr f = open(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError("'" + path.string() + "' is not a PNG file");
  }
  std::string error;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_error, on_warning);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialization failed");
  }

  Raw raw;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("malformed PNG '" + path.string() + "': " + error);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  raw.samples.resize(count);
  if (raw.bit_depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      // PNG stores 16-bit samples big-endian.
      const unsigned v = (static_cast<unsigned>(buffer[2 * i]) << 8) | buffer[2 * i + 1];
      raw.samples[i] = static_cast<float>(v / 65535.0);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      raw.samples[i] = static_cast<float>(buffer[i] / 255.0);
    }
  }
  return raw;
}

void encode(const std::filesystem::path& path, int width, int height, int color_type,
            const std::vector<unsigned char>& bytes) {
  FilePtr f = open(path, "wb");
  std::string error;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_error, on_warning);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(bytes.data()) +
              static_cast<std::size_t>(y) * width * channels;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("cannot write PNG '" + path.string() + "': " + error);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

ImageBuffer read_png(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  const Raw raw = decode(path);
  const bool gray = raw.channels <= 2;
  const bool alpha = raw.channels == 2 || raw.channels == 4;
  if (alpha && warnings) {
    warnings->push_back("'" + path.string() + "': alpha channel dropped");
  }
  ImageBuffer img(raw.width, raw.height);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::size_t p = (static_cast<std::size_t>(y) * raw.width + x) * raw.channels;
      for (int c = 0; c < ImageBuffer::kChannels; ++c) {
        img.at(c, y, x) = raw.samples[p + (gray ? 0 : c)];
      }
    }
  }
  img.set_source(path.string());
  return img;
}

void write_png(const ImageBuffer& img, const std::filesystem::path& path) {
  const int w = img.width();
  const int h = img.height();
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        bytes[(static_cast<std::size_t>(y) * w + x) * 3 + c] = quantize8(img.at(c, y, x));
      }
    }
  }
  encode(path, w, h, PNG_COLOR_TYPE_RGB, bytes);
}

Mask read_mask(const std::filesystem::path& path) {
  const Raw raw = decode(path);
  const int colour = raw.channels >= 3 ? 3 : 1;
  Mask mask(raw.width, raw.height);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::size_t p = (static_cast<std::size_t>(y) * raw.width + x) * raw.channels;
      const float v = raw.samples[p];
      for (int c = 1; c < colour; ++c) {
        if (raw.samples[p + c] != v) {
          throw IoError("mask '" + path.string() + "' has unequal colour channels");
        }
      }
      if (v != 0.0f && v != 1.0f) {
        throw IoError("mask '" + path.string() + "' is not binary (0 or 255)");
      }
      mask.at(y, x) = v == 1.0f ? 1 : 0;
    }
  }
  return mask;
}

void write_mask(const Mask& mask, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(mask.data().size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.data()[i] ? 255 : 0;
  encode(path, mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, bytes);
}

}  // namespace med
