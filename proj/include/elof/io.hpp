#pragma once

// Binary field snapshots and the diagnostics CSV.
//
// Snapshot layout, all little-endian:
//   "ELOF"  u32 version  u32 N  f64 L  f64 t  u32 field_count
//   per field: u32 name_length, name bytes, u32 rank, f64 payload
// Payload is component-major, each component x-fastest (i + N (j + N k)),
// 3^rank components. Fields are written in the order v, u, p.

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "elof/diagnostics.hpp"
#include "elof/errors.hpp"
#include "elof/grid.hpp"
#include "elof/solver.hpp"

namespace elof {

inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u32(std::uint32_t x) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  }
  void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
  void raw(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<char>& bytes() { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<char>& b) : b_(b) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return x;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(b_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n)
      throw TruncatedFile("snapshot ends after " + std::to_string(b_.size()) + " bytes, needed " +
                          std::to_string(pos_ + n));
  }
  const std::vector<char>& b_;
  std::size_t pos_ = 0;
};

template <int Rank>
void put_field(ByteWriter& w, const std::string& name, const Field<Rank>& f) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.raw(name);
  w.u32(Rank);
  for (double x : f.data()) w.f64(x);
}

template <int Rank>
void get_field(ByteReader& r, const std::string& name, Field<Rank>& f) {
  const std::uint32_t len = r.u32();
  if (len > 64) throw FormatError("implausible field name length " + std::to_string(len));
  const std::string got = r.raw(len);
  if (got != name) throw FormatError("expected field '" + name + "', found '" + got + "'");
  const std::uint32_t rank = r.u32();
  if (rank != Rank) throw FormatError("field '" + name + "' has rank " + std::to_string(rank));
  for (double& x : f.data()) x = r.f64();
}

inline std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to " + path + " failed");
}

}  // namespace detail

inline std::vector<char> encode_snapshot(const FlowState& s) {
  const Grid& g = s.grid();
  detail::ByteWriter w;
  w.raw("ELOF");
  w.u32(kSnapshotVersion);
  w.u32(static_cast<std::uint32_t>(g.n()));
  w.f64(g.length());
  w.f64(s.t);
  w.u32(3);
  detail::put_field(w, "v", s.v);
  detail::put_field(w, "u", s.u);
  detail::put_field(w, "p", s.p);
  return std::move(w.bytes());
}

inline FlowState decode_snapshot(const std::vector<char>& bytes) {
  detail::ByteReader r(bytes);
  if (r.raw(4) != "ELOF") throw FormatError("bad magic, not a snapshot");
  const std::uint32_t version = r.u32();
  if (version != kSnapshotVersion) throw FormatError("unsupported snapshot version " + std::to_string(version));
  const std::uint32_t n = r.u32();
  const double length = r.f64();
  const double t = r.f64();
  if (n > 1024 || (n & (n - 1)) != 0 || n < 8 || !(length > 0.0) || !std::isfinite(length))
    throw FormatError("invalid grid N=" + std::to_string(n) + " L=" + std::to_string(length));
  const std::uint32_t count = r.u32();
  if (count != 3) throw FormatError("expected 3 fields, found " + std::to_string(count));
  FlowState s{Grid(static_cast<int>(n), length)};
  s.t = t;
  detail::get_field(r, "v", s.v);
  detail::get_field(r, "u", s.u);
  detail::get_field(r, "p", s.p);
  if (!r.done()) throw FormatError("trailing bytes after the last field");
  return s;
}

inline void write_snapshot(const FlowState& s, const std::string& path) {
  detail::write_file(path, encode_snapshot(s));
}

inline FlowState read_snapshot(const std::string& path) { return decode_snapshot(detail::read_file(path)); }

/// 64-bit FNV-1a of the encoded snapshot.
inline std::uint64_t snapshot_checksum(const FlowState& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : encode_snapshot(s)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Diagnostics CSV.

inline std::string csv_header() {
  std::string s;
  for (std::size_t i = 0; i < DiagnosticsRecord::columns.size(); ++i)
    s += (i ? "," : "") + std::string(DiagnosticsRecord::columns[i]);
  return s;
}

inline std::string csv_row(const DiagnosticsRecord& r) {
  std::string s;
  char buf[32];
  const auto v = r.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    s += (i ? "," : "") + std::string(buf);
  }
  return s;
}

inline DiagnosticsRecord parse_csv_row(const std::string& line) {
  std::array<double, 12> v{};
  std::stringstream ss(line);
  std::string cell;
  std::size_t i = 0;
  while (std::getline(ss, cell, ',')) {
    if (i >= v.size()) throw FormatError("too many columns in diagnostics row");
    char* end = nullptr;
    v[i] = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0') throw FormatError("bad number '" + cell + "' in diagnostics row");
    ++i;
  }
  if (i != v.size()) throw FormatError("expected 12 columns, found " + std::to_string(i));
  return DiagnosticsRecord::from_values(v);
}

/// Appends one row, writing the header first when the file is new or empty.
inline void append_diagnostics(const DiagnosticsRecord& r, const std::string& path) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open " + path + " for appending");
  if (fresh) out << csv_header() << '\n';
  out << csv_row(r) << '\n';
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

inline std::vector<DiagnosticsRecord> read_diagnostics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw FormatError(path + ": missing diagnostics header");
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_csv_row(line));
  return out;
}

}  // namespace elof
