#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "homsim/kernels.hpp"

namespace homsim {

namespace {

constexpr char kMagic[4] = {'H', 'O', 'M', 'K'};
constexpr std::uint16_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "kernel cache I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("kernel cache: truncated file");
  return v;
}

void put_complex(std::ostream& out, const std::vector<Complex>& v) {
  for (const Complex& z : v) {
    put(out, z.real());
    put(out, z.imag());
  }
}

void get_complex(std::istream& in, std::vector<Complex>& v, std::size_t n) {
  v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    v[i] = {re, im};
  }
}

std::vector<std::uint8_t> hash_bytes(const std::string& hex) {
  if (hex.size() != 64) throw std::runtime_error("kernel cache: bad hash length");
  std::vector<std::uint8_t> b(32);
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw std::runtime_error("kernel cache: bad hash digit");
  };
  for (std::size_t i = 0; i < 32; ++i)
    b[i] = static_cast<std::uint8_t>((nib(hex[2 * i]) << 4) | nib(hex[2 * i + 1]));
  return b;
}

std::string hash_hex_from_bytes(const std::uint8_t* b) {
  static const char* hex = "0123456789abcdef";
  std::string out(64, '0');
  for (std::size_t i = 0; i < 32; ++i) {
    out[2 * i] = hex[b[i] >> 4];
    out[2 * i + 1] = hex[b[i] & 0xf];
  }
  return out;
}

} // namespace

void save_table(const KernelTable& table, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_table: cannot open " + tmp);
    out.write(kMagic, 4);
    put(out, kVersion);
    const auto hb = hash_bytes(table.hash);
    out.write(reinterpret_cast<const char*>(hb.data()), 32);

    const KernelConfig& c = table.config;
    put(out, c.crystal.length);
    put(out, c.crystal.gvd_mismatch);
    put(out, c.crystal.walkoff);
    put(out, c.crystal.pump_wavenumber);
    put(out, c.crystal.central_frequency);
    put(out, c.layout.fourier_focal_length);
    put(out, c.layout.detection_focal_length);
    put(out, c.layout.modulator_to_aperture);
    put(out, c.layout.lens_to_detector);
    put(out, static_cast<std::uint8_t>(c.aperture_a.kind == ApertureKind::Gaussian ? 0 : 1));
    put(out, c.aperture_a.radius);
    put(out, static_cast<std::uint8_t>(c.aperture_b.kind == ApertureKind::Gaussian ? 0 : 1));
    put(out, c.aperture_b.radius);
    put(out, c.pitch);
    put(out, static_cast<std::uint32_t>(c.half_extent));
    put(out, static_cast<std::uint32_t>(c.scan.tau.size()));
    for (double t : c.scan.tau) put(out, t);

    put_complex(out, table.alpha);
    put_complex(out, table.i_tensor);
    put_complex(out, table.r0x);
    put_complex(out, table.r0y);
    if (!out) throw std::runtime_error("save_table: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

KernelTable load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_table: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_table: bad magic in " + path);
  const auto version = get<std::uint16_t>(in);
  if (version != kVersion)
    throw std::runtime_error("load_table: unsupported version " + std::to_string(version));
  std::uint8_t hb[32];
  in.read(reinterpret_cast<char*>(hb), 32);
  if (!in) throw std::runtime_error("load_table: truncated hash");

  KernelTable t;
  t.hash = hash_hex_from_bytes(hb);
  KernelConfig& c = t.config;
  c.crystal.length = get<double>(in);
  c.crystal.gvd_mismatch = get<double>(in);
  c.crystal.walkoff = get<double>(in);
  c.crystal.pump_wavenumber = get<double>(in);
  c.crystal.central_frequency = get<double>(in);
  c.layout.fourier_focal_length = get<double>(in);
  c.layout.detection_focal_length = get<double>(in);
  c.layout.modulator_to_aperture = get<double>(in);
  c.layout.lens_to_detector = get<double>(in);
  c.aperture_a.kind = get<std::uint8_t>(in) == 0 ? ApertureKind::Gaussian : ApertureKind::HardCircle;
  c.aperture_a.radius = get<double>(in);
  c.aperture_a.label = 'A';
  c.aperture_b.kind = get<std::uint8_t>(in) == 0 ? ApertureKind::Gaussian : ApertureKind::HardCircle;
  c.aperture_b.radius = get<double>(in);
  c.aperture_b.label = 'B';
  c.pitch = get<double>(in);
  c.half_extent = static_cast<int>(get<std::uint32_t>(in));
  const auto ntau = get<std::uint32_t>(in);
  c.scan.tau.resize(ntau);
  for (std::uint32_t i = 0; i < ntau; ++i) c.scan.tau[i] = get<double>(in);

  const std::size_t side2 = static_cast<std::size_t>(t.side()) * t.side();
  get_complex(in, t.alpha, side2);
  get_complex(in, t.i_tensor, side2 * ntau);
  get_complex(in, t.r0x, side2);
  get_complex(in, t.r0y, side2);

  if (t.hash != c.hash_hex())
    throw std::runtime_error("load_table: stored hash does not match stored config (corrupt file?)");
  return t;
}

KernelTable load_table(const std::string& path, const KernelConfig& expected) {
  KernelTable t = load_table(path);
  if (t.hash != expected.hash_hex())
    throw std::runtime_error("load_table: cache was built for a different configuration");
  return t;
}

} // namespace homsim
