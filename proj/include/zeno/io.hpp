#pragma once

// Output records: CSV with '#' metadata lines and JSON documents, plus the
// JSON state-file format [[bitstring, re, im], ...].

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zeno/bands.hpp"
#include "zeno/lindblad.hpp"
#include "zeno/observables.hpp"

namespace zeno {

inline constexpr const char* kVersion = "1.0.0";

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct CsvTable {
  Metadata metadata;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// 12 significant digits, shortest form.
std::string format_number(double x);

void write_csv(std::ostream& os, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

// Parses a file written by write_csv.
CsvTable read_csv(std::istream& is);

// Columns t, n_0 .. n_{N-1}, p.
CsvTable series_table(const ObservableSeries& series, Metadata metadata);

void write_json_file(const std::string& path, const nlohmann::json& doc);

nlohmann::json band_structure_json(const BandStructure& bands, const InternalBasis& basis);

StateVector read_state_file(const std::string& path);
StateVector parse_state_json(const nlohmann::json& doc);
nlohmann::json state_json(const StateVector& psi);

}  // namespace zeno
