#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "omchaos/errors.hpp"
#include "omchaos/model.hpp"
#include "omchaos/version.hpp"

namespace omchaos {

/// Shortest decimal representation that round-trips the exact double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw IoError("failed to format floating-point value");
  return std::string(buf.data(), end);
}

/// Ordered key/value metadata block written as '# key = value' lines.
/// Outputs are self-describing: the header carries everything needed to
/// re-derive the payload.
class Metadata {
 public:
  void add(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
  }
  void add(const std::string& key, double value) {
    add(key, format_double(value));
  }
  void add(const std::string& key, std::int64_t value) {
    add(key, std::to_string(value));
  }
  void add(const std::string& key, std::uint64_t value) {
    add(key, std::to_string(value));
  }

  void add_model(const PhysicalParams& p, const DimensionlessModel& m) {
    add("tool_version", kVersion);
    add("hbar", constants::hbar);
    add("speed_of_light", constants::speed_of_light);
    add("cavity_length", p.cavity_length);
    add("mirror_mass", p.mirror_mass);
    add("mirror_freq", p.mirror_freq);
    add("pump_wavelength", p.pump_wavelength);
    add("cavity_decay", p.cavity_decay);
    add("cavity_pump_detuning", p.cavity_pump_detuning);
    add("atom_number", p.atom_number);
    add("vacuum_rabi", p.vacuum_rabi);
    add("atom_mass", p.atom_mass);
    add("mirror_damping", p.mirror_damping);
    add("sidemode_damping", p.sidemode_damping);
    add("pump_rate", p.pump_rate);
    add("scaled.kappa", m.kappa);
    add("scaled.detuning", m.detuning);
    add("scaled.xi", m.xi);
    add("scaled.xi_sm", m.xi_sm);
    add("scaled.recoil", m.recoil);
    add("scaled.four_wr", m.four_wr());
    add("scaled.pump", m.pump);
    add("scaled.pump_ratio", m.pump_ratio());
    add("scaled.gamma_m", m.gamma_m);
    add("scaled.gamma_sm", m.gamma_sm);
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// CSV with a '#'-prefixed metadata header. All floating-point columns use
/// shortest round-trip formatting, so identical runs produce identical bytes.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const Metadata& meta,
            const std::vector<std::string>& columns)
      : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open output file: " + path.string());
    for (const auto& [key, value] : meta.entries()) {
      out_ << "# " << key << " = " << value << "\n";
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out_ << (i ? "," : "") << columns[i];
    }
    out_ << "\n";
    n_columns_ = columns.size();
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != n_columns_) {
      throw IoError("CSV row width does not match the declared columns");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out_ << (i ? "," : "") << cells[i];
    }
    out_ << "\n";
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("failed to flush CSV output");
  }

 private:
  std::ofstream out_;
  std::size_t n_columns_ = 0;
};

/// Raw little-endian float64 column dump for long trajectories; the matching
/// metadata goes to a '.meta' sidecar next to it.
inline void write_binary_columns(const std::filesystem::path& path,
                                 const Metadata& meta,
                                 const std::vector<std::string>& columns,
                                 const std::vector<double>& row_major,
                                 std::size_t n_rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path.string());
  out.write(reinterpret_cast<const char*>(row_major.data()),
            static_cast<std::streamsize>(row_major.size() * sizeof(double)));
  if (!out) throw IoError("failed to write binary dump: " + path.string());
  out.close();

  Metadata side = meta;
  side.add("binary.rows", static_cast<std::int64_t>(n_rows));
  side.add("binary.columns", static_cast<std::int64_t>(columns.size()));
  std::string names;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    names += (i ? "," : "") + columns[i];
  }
  side.add("binary.column_names", names);
  side.add("binary.encoding", "float64-little-endian-row-major");
  std::ofstream ms(path.string() + ".meta", std::ios::binary);
  if (!ms) throw IoError("cannot open sidecar: " + path.string() + ".meta");
  for (const auto& [key, value] : side.entries()) {
    ms << "# " << key << " = " << value << "\n";
  }
}

}  // namespace omchaos
