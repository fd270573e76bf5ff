#include "cylsfm/estimation/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

#include "cylsfm/core/error.hpp"

namespace cylsfm {

namespace {

constexpr char kMagic[8] = {'C', 'Y', 'L', 'S', 'F', 'M', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T v) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(v);
  unsigned char buf[sizeof(T)];
  for (std::size_t k = 0; k < sizeof(T); ++k) buf[k] = static_cast<unsigned char>(bits >> (8 * k));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  require(static_cast<bool>(is), ErrorCode::Format, "truncated checkpoint");
  U bits = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) bits |= static_cast<U>(buf[k]) << (8 * k);
  return std::bit_cast<T>(bits);
}

std::uint64_t element_count(const std::vector<std::uint64_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::uint64_t{1}, std::multiplies<>());
}

}  // namespace

void Checkpoint::put(const std::string& name, std::vector<std::uint64_t> dims, std::vector<double> data) {
  require(element_count(dims) == data.size(), ErrorCode::ShapeMismatch, "checkpoint entry size mismatch: " + name);
  for (auto& e : entries)
    if (e.name == name) {
      e.dims = std::move(dims);
      e.data = std::move(data);
      return;
    }
  entries.push_back({name, std::move(dims), std::move(data)});
}

const CheckpointEntry& Checkpoint::get(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw Error(ErrorCode::Format, "checkpoint has no entry " + name);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return true;
  return false;
}

double Checkpoint::scalar(const std::string& name) const {
  const auto& e = get(name);
  require(e.data.size() == 1, ErrorCode::Format, "checkpoint entry is not a scalar: " + name);
  return e.data[0];
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + tmp.string());
    os.write(kMagic, sizeof kMagic);
    write_le<std::uint32_t>(os, kVersion);
    write_le<std::uint64_t>(os, entries.size());
    for (const auto& e : entries) {
      write_le<std::uint32_t>(os, static_cast<std::uint32_t>(e.name.size()));
      os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
      write_le<std::uint32_t>(os, static_cast<std::uint32_t>(e.dims.size()));
      for (auto d : e.dims) write_le<std::uint64_t>(os, d);
      for (double v : e.data) write_le<double>(os, v);
    }
    os.flush();
    require(static_cast<bool>(os), ErrorCode::Io, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::Io, "cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  require(is && std::memcmp(magic, kMagic, sizeof kMagic) == 0, ErrorCode::Format, "not a checkpoint: " + path.string());
  const auto version = read_le<std::uint32_t>(is);
  require(version == kVersion, ErrorCode::Format, "unsupported checkpoint version");
  const auto count = read_le<std::uint64_t>(is);
  Checkpoint ck;
  for (std::uint64_t k = 0; k < count; ++k) {
    CheckpointEntry e;
    const auto len = read_le<std::uint32_t>(is);
    require(len < (1u << 20), ErrorCode::Format, "implausible entry name length");
    e.name.resize(len);
    is.read(e.name.data(), len);
    const auto rank = read_le<std::uint32_t>(is);
    require(rank <= 8, ErrorCode::Format, "implausible entry rank");
    for (std::uint32_t r = 0; r < rank; ++r) e.dims.push_back(read_le<std::uint64_t>(is));
    const std::uint64_t n = element_count(e.dims);
    require(n < (1ull << 32), ErrorCode::Format, "implausible entry size");
    e.data.resize(n);
    for (auto& v : e.data) v = read_le<double>(is);
    ck.entries.push_back(std::move(e));
  }
  require(is.peek() == std::char_traits<char>::eof(), ErrorCode::Format, "trailing bytes after checkpoint entries");
  return ck;
}

bool Checkpoint::operator==(const Checkpoint& o) const {
  if (entries.size() != o.entries.size()) return false;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& a = entries[k];
    const auto& b = o.entries[k];
    if (a.name != b.name || a.dims != b.dims || a.data.size() != b.data.size()) return false;
    if (!a.data.empty() && std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace cylsfm
