#pragma once

// 8-bit grayscale PNG input through libpng's simplified API. Link PNG::PNG.

#include <filesystem>
#include <string>

#include <png.h>

#include "nnip/image.hpp"

namespace nnip {

inline LumaImage read_png_gray(const std::filesystem::path& path)
{
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw ImageError(path.string() + ": " + image.message);
  if ((image.format & PNG_FORMAT_FLAG_COLOR) || PNG_IMAGE_SAMPLE_COMPONENT_SIZE(image.format) != 1)
  {
    png_image_free(&image);
    throw ImageError(path.string() + ": only 8-bit grayscale PNG is supported");
  }
  image.format = PNG_FORMAT_GRAY;
  LumaImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.samples.data(), 0, nullptr))
  {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ImageError(path.string() + ": " + msg);
  }
  return out;
}

} // namespace nnip
