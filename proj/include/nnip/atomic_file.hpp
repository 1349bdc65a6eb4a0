#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include <unistd.h>

namespace nnip {

class FileError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Writes `contents` next to `path` under a temporary name and renames it
/// into place, so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents)
{
  namespace fs = std::filesystem;
  if (path.has_parent_path() && !fs::exists(path.parent_path()))
    throw FileError("output directory does not exist: " + path.parent_path().string());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw FileError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out)
    {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw FileError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
  {
    fs::remove(tmp, ec);
    throw FileError("cannot move output into place: " + path.string());
  }
}

inline std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FileError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace nnip
