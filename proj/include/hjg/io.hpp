#ifndef HJG_IO_HPP
#define HJG_IO_HPP

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hjg/errors.hpp"
#include "hjg/extract.hpp"
#include "hjg/solver.hpp"
#include "hjg/synthesis.hpp"

namespace hjg {

// ---------------------------------------------------------------------------
// VF01 container
//
//   "VF01"
//   u32 version (1)
//   u32 n (state dimensions)
//   n+1 x { u32 count, f64 min, f64 max }   state axes, then z
//   u32 stamp count K
//   K x f64 stamps (ascending)
//   u8 variant code, u8 mode code
//   K x prod(counts) x f64 values, stamp-major, row-major (z fastest)
//
// All integers and doubles little-endian.

inline constexpr char kContainerMagic[4] = {'V', 'F', '0', '1'};
inline constexpr std::uint32_t kContainerVersion = 1;

inline std::uint8_t variant_code(EquationVariant v) { return static_cast<std::uint8_t>(v); }
inline std::uint8_t mode_code(PlayerMode m) { return static_cast<std::uint8_t>(m); }

namespace detail {

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.append(c, n);
  }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw FormatError("VF01: truncated file");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(data_[pos_ + i])} << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(data_[pos_ + i])} << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Raw container contents; a solver ValueFunction or an oracle table.
inline std::string encode_vf01(const Grid& grid, const std::vector<double>& times,
                               const std::vector<const std::vector<double>*>& fields, EquationVariant variant,
                               PlayerMode mode) {
  detail::ByteWriter w;
  w.raw(kContainerMagic, 4);
  w.u32(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(grid.state_dim()));
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const Axis& ax = grid.axis(d);
    w.u32(static_cast<std::uint32_t>(ax.count));
    w.f64(ax.min);
    w.f64(ax.max);
  }
  w.u32(static_cast<std::uint32_t>(times.size()));
  for (double t : times) w.f64(t);
  w.u8(variant_code(variant));
  w.u8(mode_code(mode));
  for (const auto* f : fields) {
    if (f->size() != grid.point_count()) throw FormatError("VF01: field size does not match grid");
    for (double v : *f) w.f64(v);
  }
  return w.take();
}

inline std::string encode_vf01(const ValueFunction& vf) {
  std::vector<const std::vector<double>*> fields;
  for (const auto& s : vf.snapshots) fields.push_back(&s.values);
  return encode_vf01(vf.grid, vf.times, fields, vf.variant, vf.mode);
}

inline ValueFunction decode_vf01(std::string_view data) {
  detail::ByteReader r(data);
  if (r.bytes(4) != std::string_view(kContainerMagic, 4)) throw FormatError("VF01: bad magic");
  if (r.u32() != kContainerVersion) throw FormatError("VF01: unsupported version");
  const std::uint32_t n = r.u32();
  if (n == 0 || n > 16) throw FormatError("VF01: bad state dimension");
  std::vector<Axis> axes;
  for (std::uint32_t d = 0; d <= n; ++d) {
    Axis ax;
    ax.count = r.u32();
    ax.min = r.f64();
    ax.max = r.f64();
    try {
      ax.validate("VF01 axis " + std::to_string(d));
    } catch (const ConfigError& e) {
      throw FormatError(e.what());
    }
    axes.push_back(ax);
  }
  ValueFunction vf;
  vf.grid.z_axis = axes.back();
  axes.pop_back();
  vf.grid.state_axes = std::move(axes);
  vf.grid.ghost_width = 3;
  const std::uint32_t k = r.u32();
  if (k == 0) throw FormatError("VF01: no stamps");
  vf.times.resize(k);
  for (auto& t : vf.times) t = r.f64();
  for (std::size_t i = 1; i < k; ++i)
    if (!(vf.times[i] > vf.times[i - 1])) throw FormatError("VF01: stamps not ascending");
  const std::uint8_t variant = r.u8(), mode = r.u8();
  if (variant > 3 || mode > 2) throw FormatError("VF01: bad variant or mode code");
  vf.variant = static_cast<EquationVariant>(variant);
  vf.mode = static_cast<PlayerMode>(mode);
  const std::size_t points = vf.grid.point_count();
  if (r.remaining() != static_cast<std::size_t>(k) * points * 8) throw FormatError("VF01: payload size mismatch");
  vf.snapshots.reserve(k);
  for (std::uint32_t s = 0; s < k; ++s) {
    ScalarField f{vf.grid, std::vector<double>(points)};
    for (auto& v : f.values) v = r.f64();
    vf.snapshots.push_back(std::move(f));
  }
  return vf;
}

/// Writes `contents` to a temporary sibling and renames it over `path`.
inline void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("rename to " + path + " failed: " + ec.message());
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_value_function(const std::string& path, const ValueFunction& vf) {
  write_file_atomic(path, encode_vf01(vf));
}

inline ValueFunction read_value_function(const std::string& path) { return decode_vf01(read_file(path)); }

// ---------------------------------------------------------------------------
// CSV

/// Shortest text that round-trips the double (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Columns x1..xn,value.
inline void write_slice_csv(std::ostream& os, const StateSlice& slice) {
  const std::size_t n = slice.axes.size();
  for (std::size_t d = 0; d < n; ++d) os << 'x' << d + 1 << ',';
  os << "value\n";
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t s = 0; s < slice.values.size(); ++s) {
    std::size_t rem = s;
    for (std::size_t d = n; d-- > 0;) {
      idx[d] = rem % slice.axes[d].count;
      rem /= slice.axes[d].count;
    }
    for (std::size_t d = 0; d < n; ++d) os << format_double(slice.axes[d].coord(idx[d])) << ',';
    os << format_double(slice.values[s]) << '\n';
  }
}

/// Columns s,x1..xn,z,a1..,b1..,c,L.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  if (tr.times.empty()) return;
  const std::size_t n = tr.states.front().size();
  const std::size_t ma = tr.controls_a.front().size(), mb = tr.controls_b.front().size();
  os << 's';
  for (std::size_t d = 0; d < n; ++d) os << ",x" << d + 1;
  os << ",z";
  for (std::size_t d = 0; d < ma; ++d) os << ",a" << d + 1;
  for (std::size_t d = 0; d < mb; ++d) os << ",b" << d + 1;
  os << ",c,L\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    os << format_double(tr.times[k]);
    for (double v : tr.states[k]) os << ',' << format_double(v);
    os << ',' << format_double(tr.z_values[k]);
    for (double v : tr.controls_a[k]) os << ',' << format_double(v);
    for (double v : tr.controls_b[k]) os << ',' << format_double(v);
    os << ',' << format_double(tr.constraint_trace[k]) << ',' << format_double(tr.stage_cost_trace[k]) << '\n';
  }
}

inline void write_text_atomic(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream os;
  body(os);
  write_file_atomic(path, os.str());
}

}  // namespace hjg

#endif  // HJG_IO_HPP
