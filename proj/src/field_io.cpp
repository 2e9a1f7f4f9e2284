// Binary field persistence, little-endian, magic "GFE1".

#include "gfe/field_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <type_traits>
#include <vector>

namespace gfe {

namespace {

constexpr char kMagic[4] = {'G', 'F', 'E', '1'};
constexpr std::uint16_t kVersion = 1;

void put_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}

template <typename T>
void put_le(std::string& out, T value) {
  unsigned char b[sizeof(T)];
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                  std::uint16_t>>;
  U u;
  std::memcpy(&u, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i)
    b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  put_bytes(out, b, sizeof(T));
}

struct Reader {
  std::string data;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) {
    if (pos + n > data.size())
      throw TruncatedPayloadError(std::string("field file truncated in ") + what);
  }
  template <typename T>
  T get_le(const char* what) {
    need(sizeof(T), what);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::uint16_t>>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<U>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    pos += sizeof(T);
    T value;
    std::memcpy(&value, &u, sizeof(T));
    return value;
  }
};

}  // namespace

void write_field(const Field& f, const std::string& path) {
  f.require_square();
  std::string out;
  out.reserve(28 + f.values.size() * 8);
  put_bytes(out, kMagic, 4);
  out.push_back(static_cast<char>(f.kind));
  out.push_back(0);  // reserved
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.N));
  put_le<std::uint64_t>(out, f.seed);
  put_le<std::int32_t>(out, f.k_lo);
  put_le<std::int32_t>(out, f.k_hi);
  for (double v : f.values) put_le<double>(out, v);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("write_field: cannot open " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw std::runtime_error("write_field: short write to " + path);
}

Field read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_field: cannot open " + path);
  Reader r;
  {
    std::ostringstream tmp;
    tmp << is.rdbuf();
    r.data = tmp.str();
  }
  r.need(4, "magic");
  if (std::memcmp(r.data.data(), kMagic, 4) != 0)
    throw BadMagicError("read_field: bad magic in " + path);
  r.pos = 4;
  r.need(2, "header");
  const auto kind_byte = static_cast<unsigned char>(r.data[r.pos]);
  r.pos += 2;  // kind + reserved
  const auto version = r.get_le<std::uint16_t>("version");
  if (version != kVersion)
    throw VersionMismatchError("read_field: version " + std::to_string(version) +
                               ", expected " + std::to_string(kVersion));
  if (kind_byte > 2)
    throw std::runtime_error("read_field: unknown field kind " +
                             std::to_string(kind_byte));
  Field f;
  f.kind = static_cast<FieldKind>(kind_byte);
  f.N = static_cast<int>(r.get_le<std::uint32_t>("N"));
  f.seed = r.get_le<std::uint64_t>("seed");
  f.k_lo = r.get_le<std::int32_t>("k_lo");
  f.k_hi = r.get_le<std::int32_t>("k_hi");
  if (f.N < 1 || f.N > 100000)
    throw std::runtime_error("read_field: implausible N " + std::to_string(f.N));
  const std::size_t count = static_cast<std::size_t>(f.N) * f.N;
  r.need(count * 8, "values");
  f.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) f.values[i] = r.get_le<double>("values");
  return f;
}

}  // namespace gfe
