#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kchem/kinetic.hpp"
#include "kchem/monitor.hpp"
#include "kchem/signal.hpp"

namespace kchem {

//! Round-trip exact decimal form of a double (17 significant digits).
std::string format_double(double v);

//! CSV with a commented preamble: "# config_hash=<hash>" then `comments`.
void write_csv(std::filesystem::path const& path, std::string const& hash,
               std::vector<std::string> const& columns, std::vector<std::vector<double>> const& rows,
               std::vector<std::string> const& comments = {});

struct CsvTable {
  std::string hash;
  std::vector<std::string> comments;  //!< preamble lines without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  //! Index of a column; throws ArgumentError if absent.
  std::size_t column(std::string const& name) const;
};

//! Numeric CSV written by write_csv (comments skipped, header parsed).
CsvTable read_csv(std::filesystem::path const& path);

//! Ledger export (t, inequality, measured, bound, margin, violated).
void write_ledger_csv(std::filesystem::path const& path, std::string const& hash,
                      BoundLedger const& ledger);

//! Signal snapshot: x, S_c, dS_c/dx, dS_c/dt per component.
void write_signal_csv(std::filesystem::path const& path, std::string const& hash,
                      SignalField const& s);

//! Binary phase-space snapshot: magic "KCHEMF01", header, little-endian doubles.
void write_field_binary(std::filesystem::path const& path, std::string const& hash,
                        PhaseSpaceField const& f);

//! Reads a snapshot written by write_field_binary.
PhaseSpaceField read_field_binary(std::filesystem::path const& path, std::string* hash = nullptr);

}  // namespace kchem
