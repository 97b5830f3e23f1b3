#pragma once

/// Distribution snapshots.
///
///   polykin-snap-1
///   {"format":"f64le","v_extent":6,...,"x_cells":1}
///   <body>
///
/// The body holds x_cells * n^3 * n_e values in (x, v1, v2, v3, I) order,
/// either as raw little-endian doubles or as CSV text with one velocity node
/// per line.  Both encodings round-trip bit for bit.

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "polykin/error.hpp"
#include "polykin/moments.hpp"
#include "polykin/quadrature.hpp"

namespace polykin {

inline constexpr const char* kSnapshotMagic = "polykin-snap-1";

enum class SnapshotFormat { f64le, csv };

inline std::string to_string(SnapshotFormat f) { return f == SnapshotFormat::f64le ? "f64le" : "csv"; }

struct Snapshot {
  GridSpec spec;
  SnapshotFormat format = SnapshotFormat::f64le;
  std::vector<Distribution> cells;
};

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((x >> (8 * i)) & 0xffULL) << (8 * (7 - i));
    return r;
  }
  return x;
}

inline std::string shortest_repr(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const GridSpec& spec, const std::vector<Distribution>& cells,
                           SnapshotFormat format = SnapshotFormat::f64le) {
  if (cells.empty()) throw parameter_error("snapshot needs at least one cell");
  const Grid grid(spec);
  for (const auto& c : cells)
    if (!(c.grid() == grid)) throw parameter_error("snapshot cells must share the header grid");

  nlohmann::ordered_json header;
  header["format"] = to_string(format);
  header["v_extent"] = spec.v_extent;
  header["v_points_per_axis"] = spec.v_points_per_axis;
  header["energy_variable_max"] = spec.energy_variable_max;
  header["energy_points"] = spec.energy_points;
  header["delta"] = spec.delta;
  header["x_cells"] = cells.size();
  os << kSnapshotMagic << '\n' << header.dump() << '\n';

  if (format == SnapshotFormat::f64le) {
    for (const auto& c : cells)
      for (double x : c.values()) {
        const std::uint64_t bits = detail::to_little_endian(std::bit_cast<std::uint64_t>(x));
        os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
      }
  } else {
    const std::size_t ne = grid.energy_size();
    for (const auto& c : cells) {
      const auto v = c.values();
      for (std::size_t k = 0; k < grid.velocity_size(); ++k) {
        for (std::size_t m = 0; m < ne; ++m) {
          if (m) os << ',';
          os << detail::shortest_repr(v[k * ne + m]);
        }
        os << '\n';
      }
    }
  }
  if (!os) throw parse_error("snapshot write failed");
}

inline Snapshot read_snapshot(std::istream& is) {
  std::string magic;
  if (!std::getline(is, magic)) throw parse_error("snapshot: empty input");
  if (magic != kSnapshotMagic) throw parse_error("snapshot: missing '" + std::string(kSnapshotMagic) + "' header");
  std::string header_line;
  if (!std::getline(is, header_line)) throw parse_error("snapshot: missing JSON header line");

  Snapshot snap;
  std::size_t x_cells = 1;
  try {
    const auto h = nlohmann::json::parse(header_line);
    const std::string fmt = h.at("format").get<std::string>();
    if (fmt == "f64le") {
      snap.format = SnapshotFormat::f64le;
    } else if (fmt == "csv") {
      snap.format = SnapshotFormat::csv;
    } else {
      throw parse_error("snapshot: unknown body format '" + fmt + "'");
    }
    snap.spec.v_extent = h.at("v_extent").get<double>();
    snap.spec.v_points_per_axis = h.at("v_points_per_axis").get<int>();
    snap.spec.energy_variable_max = h.at("energy_variable_max").get<double>();
    snap.spec.energy_points = h.at("energy_points").get<int>();
    snap.spec.delta = h.at("delta").get<double>();
    if (h.contains("x_cells")) {
      const long long n = h.at("x_cells").get<long long>();
      if (n < 1) throw parse_error("snapshot: x_cells must be >= 1");
      x_cells = static_cast<std::size_t>(n);
    }
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("snapshot header: ") + e.what());
  }
  try {
    snap.spec.validate();
  } catch (const Error& e) {
    throw parse_error(std::string("snapshot header: ") + e.what());
  }

  const Grid grid(snap.spec);
  const std::size_t per_cell = grid.size();
  const std::size_t total = per_cell * x_cells;
  std::vector<double> body;
  body.reserve(total);

  if (snap.format == SnapshotFormat::f64le) {
    const std::string raw((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (raw.size() != total * 8)
      throw parse_error("snapshot: body has " + std::to_string(raw.size()) + " bytes, header implies " +
                        std::to_string(total * 8));
    for (std::size_t i = 0; i < total; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, raw.data() + 8 * i, 8);
      body.push_back(std::bit_cast<double>(detail::to_little_endian(bits)));
    }
  } else {
    const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const char* p = text.data();
    const char* end = p + text.size();
    auto is_sep = [](char c) { return c == ',' || c == '\n' || c == '\r' || c == ' ' || c == '\t'; };
    while (p < end) {
      while (p < end && is_sep(*p)) ++p;
      if (p == end) break;
      double x;
      const auto res = std::from_chars(p, end, x);
      if (res.ec != std::errc())
        throw parse_error("snapshot: bad number at value " + std::to_string(body.size()));
      if (res.ptr < end && !is_sep(*res.ptr))
        throw parse_error("snapshot: bad number at value " + std::to_string(body.size()));
      body.push_back(x);
      p = res.ptr;
    }
    if (body.size() != total)
      throw parse_error("snapshot: body has " + std::to_string(body.size()) + " values, header implies " +
                        std::to_string(total));
  }

  for (std::size_t i = 0; i < body.size(); ++i)
    if (!std::isfinite(body[i]) || body[i] < 0.0)
      throw parse_error("snapshot: value " + std::to_string(i) + " is negative or not finite");

  snap.cells.reserve(x_cells);
  for (std::size_t c = 0; c < x_cells; ++c)
    snap.cells.emplace_back(grid, std::vector<double>(body.begin() + c * per_cell,
                                                      body.begin() + (c + 1) * per_cell));
  return snap;
}

inline void save_snapshot(const std::string& path, const GridSpec& spec, const std::vector<Distribution>& cells,
                          SnapshotFormat format = SnapshotFormat::f64le) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw parse_error("cannot open '" + path + "' for writing");
  write_snapshot(os, spec, cells, format);
}

inline Snapshot load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw parse_error("cannot open '" + path + "'");
  return read_snapshot(is);
}

}  // namespace polykin
