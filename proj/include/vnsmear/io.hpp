#ifndef VNSMEAR_IO_HPP
#define VNSMEAR_IO_HPP

// Flat binary matrix dump.
//
// Layout (little-endian):
//   bytes  0..7   magic "VNSRHO01"
//   bytes  8..15  uint64 n
//   bytes 16..19  uint32 basis tag (0 position, 1 momentum, 2 finite)
//   bytes 20..31  reserved, zero
//   then n*n (re, im) float64 pairs, row-major.

#include <vnsmear/qstate.hpp>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace vnsmear::io {

inline constexpr std::array<char, 8> kMagic{'V', 'N', 'S', 'R', 'H', 'O', '0', '1'};
inline constexpr std::size_t kHeaderBytes = 32;

static_assert(std::endian::native == std::endian::little, "binary dump assumes a little-endian host");

inline std::uint32_t basis_tag(Basis b) {
  switch (b) {
    case Basis::Position: return 0;
    case Basis::Momentum: return 1;
    case Basis::Finite: return 2;
  }
  return 2;
}

struct MatrixHeader {
  std::uint64_t n;
  std::uint32_t basis;
};

template <typename Real>
void write_matrix(std::ostream& out, const BasicDensityMatrix<Real>& rho) {
  std::array<char, kHeaderBytes> header{};
  std::memcpy(header.data(), kMagic.data(), kMagic.size());
  const std::uint64_t n = static_cast<std::uint64_t>(rho.size());
  const std::uint32_t tag = basis_tag(rho.basis());
  std::memcpy(header.data() + 8, &n, sizeof n);
  std::memcpy(header.data() + 16, &tag, sizeof tag);
  out.write(header.data(), header.size());
  for (Index j = 0; j < rho.size(); ++j) {
    for (Index k = 0; k < rho.size(); ++k) {
      const double pair[2] = {double(rho.mat()(j, k).real()), double(rho.mat()(j, k).imag())};
      out.write(reinterpret_cast<const char*>(pair), sizeof pair);
    }
  }
  if (!out) throw std::runtime_error("write_matrix: stream error");
}

/// Reads a dump back; returns the header and fills `mat` (row-major order).
inline MatrixHeader read_matrix(std::istream& in, ComplexMatrix<double>& mat) {
  std::array<char, kHeaderBytes> header{};
  in.read(header.data(), header.size());
  if (!in || std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0) {
    throw std::runtime_error("read_matrix: bad magic");
  }
  MatrixHeader h{};
  std::memcpy(&h.n, header.data() + 8, sizeof h.n);
  std::memcpy(&h.basis, header.data() + 16, sizeof h.basis);
  const auto n = static_cast<Index>(h.n);
  mat.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      double pair[2];
      in.read(reinterpret_cast<char*>(pair), sizeof pair);
      mat(j, k) = {pair[0], pair[1]};
    }
  }
  if (!in) throw std::runtime_error("read_matrix: truncated payload");
  return h;
}

}  // namespace vnsmear::io

#endif  // VNSMEAR_IO_HPP
