/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "pedavar/snapshot.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "pedavar/error.h"

namespace pedavar {

namespace {

template <typename T>
void put_le(std::vector<unsigned char> & buf, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  buf.insert(buf.end(), bytes.begin(), bytes.end());
}

template <typename T>
T get_le(const std::vector<unsigned char> & buf, std::size_t & pos, const std::string & path) {
  if (pos + sizeof(T) > buf.size()) throw Error("snapshot " + path + ": truncated file");
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(const std::filesystem::path & path, const Field3 & f) {
  const Grid & g = f.grid();
  std::vector<unsigned char> buf;
  buf.reserve(28 + 8 * f.size());
  for (char c : {'P', 'E', 'D', 'A'}) buf.push_back(static_cast<unsigned char>(c));
  put_le<std::uint32_t>(buf, kSnapshotVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.nx()));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.ny()));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.nz()));
  put_le<double>(buf, g.depth());
  for (double v : f.values()) put_le<double>(buf, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("snapshot " + path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("snapshot " + path.string() + ": write failed");
}

Field3 read_snapshot(const std::filesystem::path & path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("snapshot " + path.string() + ": cannot open");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < 4 || std::memcmp(buf.data(), "PEDA", 4) != 0) {
    throw Error("snapshot " + name + ": bad magic");
  }
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(buf, pos, name);
  if (version != kSnapshotVersion) {
    throw Error("snapshot " + name + ": unsupported version " + std::to_string(version));
  }
  const auto nx = get_le<std::uint32_t>(buf, pos, name);
  const auto ny = get_le<std::uint32_t>(buf, pos, name);
  const auto nz = get_le<std::uint32_t>(buf, pos, name);
  const auto depth = get_le<double>(buf, pos, name);
  Field3 f(Grid(static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz), depth));
  if (buf.size() != pos + 8 * f.size()) throw Error("snapshot " + name + ": size does not match header");
  for (double & v : f.values()) v = get_le<double>(buf, pos, name);
  return f;
}

std::filesystem::path component_path(const std::filesystem::path & prefix, const std::string & name) {
  return prefix.parent_path() / (prefix.filename().string() + "_" + name + ".peda");
}

void write_state(const std::filesystem::path & prefix, const StateField & x) {
  write_snapshot(component_path(prefix, "u"), x.u);
  write_snapshot(component_path(prefix, "v"), x.v);
  write_snapshot(component_path(prefix, "theta"), x.theta);
}

StateField read_state(const std::filesystem::path & prefix) {
  Field3 u = read_snapshot(component_path(prefix, "u"));
  Field3 v = read_snapshot(component_path(prefix, "v"));
  Field3 theta = read_snapshot(component_path(prefix, "theta"));
  if (u.grid() != v.grid() || u.grid() != theta.grid()) {
    throw Error("state " + prefix.string() + ": component shape mismatch " + u.grid().shape() + ", " +
                v.grid().shape() + ", " + theta.grid().shape());
  }
  return StateField(std::move(u), std::move(v), std::move(theta));
}

}  // namespace pedavar
