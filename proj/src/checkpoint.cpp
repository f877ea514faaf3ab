#include "vinpaint/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vinpaint {

namespace {

constexpr char kMagic[8] = {'V', 'N', 'P', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_i64(std::ostream& os, std::int64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(static_cast<std::uint64_t>(v) >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::int64_t read_i64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return static_cast<std::int64_t>(v);
}

std::string read_string(std::istream& is) {
  const std::uint32_t n = read_u32(is);
  if (n > (1u << 20)) throw std::runtime_error("checkpoint: implausible string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

std::size_t dtype_size(Checkpoint::DType t) {
  return t == Checkpoint::DType::f32 ? 4 : 8;
}

}  // namespace

const std::string& Checkpoint::meta(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end()) throw std::runtime_error("checkpoint: missing metadata key '" + key + "'");
  return it->second;
}

long Checkpoint::meta_long(const std::string& key) const { return std::stol(meta(key)); }
double Checkpoint::meta_double(const std::string& key) const { return std::stod(meta(key)); }

void Checkpoint::put_f32(const std::string& name, const float* data, std::vector<std::int64_t> dims) {
  Array a;
  a.dtype = DType::f32;
  a.dims = std::move(dims);
  a.bytes.resize(static_cast<std::size_t>(a.element_count()) * 4);
  std::memcpy(a.bytes.data(), data, a.bytes.size());
  arrays_[name] = std::move(a);
}

void Checkpoint::put_f64(const std::string& name, const double* data, std::vector<std::int64_t> dims) {
  Array a;
  a.dtype = DType::f64;
  a.dims = std::move(dims);
  a.bytes.resize(static_cast<std::size_t>(a.element_count()) * 8);
  std::memcpy(a.bytes.data(), data, a.bytes.size());
  arrays_[name] = std::move(a);
}

const Checkpoint::Array& Checkpoint::array(const std::string& name) const {
  auto it = arrays_.find(name);
  if (it == arrays_.end()) throw std::runtime_error("checkpoint: missing array '" + name + "'");
  return it->second;
}

void Checkpoint::get_f32(const std::string& name, float* dst, std::int64_t expected_size) const {
  const Array& a = array(name);
  if (a.dtype != DType::f32) throw std::runtime_error("checkpoint: '" + name + "' is not f32");
  if (a.element_count() != expected_size)
    throw std::runtime_error("checkpoint: '" + name + "' has unexpected size");
  std::memcpy(dst, a.bytes.data(), a.bytes.size());
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open '" + path.string() + "' for writing");
  os.write(kMagic, 8);
  write_u32(os, kVersion);

  write_u32(os, static_cast<std::uint32_t>(meta_.size()));
  for (const auto& [k, v] : meta_) {
    write_string(os, k);
    write_string(os, v);
  }

  write_u32(os, static_cast<std::uint32_t>(arrays_.size()));
  for (const auto& [name, a] : arrays_) {
    write_string(os, name);
    os.put(static_cast<char>(a.dtype));
    write_u32(os, static_cast<std::uint32_t>(a.dims.size()));
    for (auto d : a.dims) write_i64(os, d);
    write_i64(os, static_cast<std::int64_t>(a.bytes.size()));
    os.write(reinterpret_cast<const char*>(a.bytes.data()),
             static_cast<std::streamsize>(a.bytes.size()));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for '" + path.string() + "'");
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open '" + path.string() + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("checkpoint: bad magic in '" + path.string() + "'");
  const std::uint32_t version = read_u32(is);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

  Checkpoint ck;
  const std::uint32_t n_meta = read_u32(is);
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = read_string(is);
    ck.meta_[k] = read_string(is);
  }

  const std::uint32_t n_arrays = read_u32(is);
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    std::string name = read_string(is);
    Array a;
    int dt = is.get();
    if (dt != 0 && dt != 1) throw std::runtime_error("checkpoint: bad dtype");
    a.dtype = static_cast<DType>(dt);
    const std::uint32_t ndims = read_u32(is);
    if (ndims > 8) throw std::runtime_error("checkpoint: implausible rank");
    a.dims.resize(ndims);
    for (std::uint32_t d = 0; d < ndims; ++d) a.dims[d] = read_i64(is);
    const std::int64_t nbytes = read_i64(is);
    if (nbytes < 0 || nbytes != a.element_count() * static_cast<std::int64_t>(dtype_size(a.dtype)))
      throw std::runtime_error("checkpoint: corrupt array '" + name + "'");
    a.bytes.resize(static_cast<std::size_t>(nbytes));
    is.read(reinterpret_cast<char*>(a.bytes.data()), nbytes);
    if (!is) throw std::runtime_error("checkpoint: truncated array '" + name + "'");
    ck.arrays_[name] = std::move(a);
  }
  return ck;
}

}  // namespace vinpaint
