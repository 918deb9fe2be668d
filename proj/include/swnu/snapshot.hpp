#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "swnu/errors.hpp"
#include "swnu/field.hpp"
#include "swnu/grid.hpp"
#include "swnu/state.hpp"

namespace swnu {

// Binary field snapshot, all little-endian:
//   bytes 0-7    magic "SWNUFLD1"
//   uint64       n1
//   uint64       n2
//   float64      box length L
//   uint8        is_real (0 or 1)
//   n1*n2 pairs  float64 (re, im), row-major in FFT order, continuum-FT units
inline constexpr std::array<char, 8> kSnapshotMagic{'S', 'W', 'N', 'U', 'F', 'L', 'D', '1'};

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace detail {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError(path, "truncated snapshot");
  return v;
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const SpectralField& f) {
  const Grid& g = f.grid();
  os.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  detail::put<std::uint64_t>(os, g.n1());
  detail::put<std::uint64_t>(os, g.n2());
  detail::put<double>(os, g.box_length());
  detail::put<std::uint8_t>(os, f.is_real() ? 1 : 0);
  os.write(reinterpret_cast<const char*>(f.coeffs().data()), static_cast<std::streamsize>(g.size() * sizeof(cplx)));
}

inline SpectralField read_snapshot(std::istream& is, const std::string& path = "<stream>") {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kSnapshotMagic) throw IoError(path, "not a field snapshot");
  const auto n1 = detail::get<std::uint64_t>(is, path);
  const auto n2 = detail::get<std::uint64_t>(is, path);
  const auto box = detail::get<double>(is, path);
  const auto real = detail::get<std::uint8_t>(is, path);
  const Grid g(n1, n2, box);
  std::vector<cplx> c(g.size());
  if (!is.read(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(c.size() * sizeof(cplx)))) {
    throw IoError(path, "truncated snapshot");
  }
  return SpectralField(g, std::move(c), real != 0);
}

inline void save_snapshot(const std::filesystem::path& path, const SpectralField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  write_snapshot(os, f);
  if (!os) throw IoError(path.string(), "write failed");
}

inline SpectralField load_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open for reading");
  return read_snapshot(is, path.string());
}

/// Writes <stem>_rho.swf, <stem>_u1.swf, <stem>_u2.swf.
inline void save_state(const std::filesystem::path& dir, const std::string& stem, const State& st) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), ec.message());
  save_snapshot(dir / (stem + "_rho.swf"), st.rho);
  save_snapshot(dir / (stem + "_u1.swf"), st.u.c1());
  save_snapshot(dir / (stem + "_u2.swf"), st.u.c2());
}

inline State load_state(const std::filesystem::path& dir, const std::string& stem) {
  return State{load_snapshot(dir / (stem + "_rho.swf")),
               VectorField(load_snapshot(dir / (stem + "_u1.swf")), load_snapshot(dir / (stem + "_u2.swf")))};
}

}  // namespace swnu
