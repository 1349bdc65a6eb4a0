#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnip {

class ImageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// 8-bit luma plane, row-major.
struct LumaImage
{
  int                       width  = 0;
  int                       height = 0;
  std::vector<std::uint8_t> samples;

  LumaImage() = default;
  LumaImage(int w, int h, std::uint8_t fill = 0) : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill)
  {
    if (w < 0 || h < 0)
      throw ImageError("negative image dimensions");
  }
  LumaImage(int w, int h, std::vector<std::uint8_t> data) : width(w), height(h), samples(std::move(data))
  {
    if (w < 0 || h < 0 || samples.size() != static_cast<std::size_t>(w) * h)
      throw ImageError("image sample count does not match width*height");
  }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  std::uint8_t  at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }

  /// sample scaled into [0, 1]
  double normalized(int x, int y) const { return at(x, y) / 255.0; }
};

namespace detail {

inline void skip_pnm_space(std::istream& in)
{
  for (;;)
  {
    const int c = in.peek();
    if (c == '#')
    {
      std::string ignored;
      std::getline(in, ignored);
    }
    else if (c != EOF && std::isspace(c))
      in.get();
    else
      return;
  }
}

inline int read_pnm_int(std::istream& in)
{
  skip_pnm_space(in);
  int v = -1;
  if (!(in >> v) || v < 0)
    throw ImageError("malformed PGM header");
  return v;
}

} // namespace detail

/// Binary PGM (P5) with maxval 255.
inline LumaImage read_pgm(std::istream& in)
{
  char magic[2] = {};
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5')
    throw ImageError("not a binary PGM (P5) stream");
  const int w      = detail::read_pnm_int(in);
  const int h      = detail::read_pnm_int(in);
  const int maxval = detail::read_pnm_int(in);
  if (w < 1 || h < 1)
    throw ImageError("PGM has zero width or height");
  if (maxval != 255)
    throw ImageError("unsupported PGM maxval " + std::to_string(maxval) + " (expected 255)");
  if (!std::isspace(in.get()))
    throw ImageError("malformed PGM header");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h);
  if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size())))
    throw ImageError("truncated PGM pixel data");
  return LumaImage(w, h, std::move(data));
}

inline LumaImage read_pgm(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ImageError("cannot open " + path.string());
  try
  {
    return read_pgm(in);
  }
  catch (const ImageError& e)
  {
    throw ImageError(path.string() + ": " + e.what());
  }
}

inline void write_pgm(std::ostream& out, const LumaImage& img)
{
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.samples.data()), static_cast<std::streamsize>(img.samples.size()));
}

inline std::string encode_pgm(const LumaImage& img)
{
  std::ostringstream out(std::ios::binary);
  write_pgm(out, img);
  return out.str();
}

} // namespace nnip
