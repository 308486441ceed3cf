#include "zeno/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace zeno {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
  return buf;
}

void write_csv(std::ostream& os, const CsvTable& t) {
  for (const auto& [k, v] : t.metadata) os << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(f, t);
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1), val = line.substr(colon + 1);
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(' ');
        const auto e = s.find_last_not_of(' ');
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      t.metadata.emplace_back(trim(key), trim(val));
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ss, cell, ',')) t.header.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != t.header.size()) throw std::runtime_error("CSV row width differs from header");
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("CSV without header row");
  return t;
}

CsvTable series_table(const ObservableSeries& s, Metadata metadata) {
  CsvTable t;
  t.metadata = std::move(metadata);
  t.header.push_back("t");
  const std::size_t n = s.site_density.empty() ? 0 : s.site_density.front().size();
  for (std::size_t j = 0; j < n; ++j) t.header.push_back("n_" + std::to_string(j));
  t.header.push_back("p");
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    std::vector<double> row{s.times[i]};
    for (std::size_t j = 0; j < n; ++j) row.push_back(s.site_density[i][j]);
    row.push_back(s.total_density[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << doc.dump(2) << '\n';
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

nlohmann::json band_structure_json(const BandStructure& b, const InternalBasis& basis) {
  nlohmann::json j;
  j["q_grid"] = b.q_grid;
  j["bands"] = b.bands;
  j["tracked_bands"] = b.tracked;
  j["flat_flags"] = b.flat_flags;
  j["flatness"] = b.flatness;
  nlohmann::json cr = nlohmann::json::array();
  for (const auto& c : b.crossings) cr.push_back({{"q", c.q}, {"bands", {c.lower, c.upper}}});
  j["crossings"] = cr;
  j["basis_states"] = basis.states;
  return j;
}

StateVector parse_state_json(const nlohmann::json& doc) {
  if (!doc.is_array() || doc.empty()) throw std::invalid_argument("state file must be a non-empty JSON list");
  int n = -1;
  std::vector<Code> codes;
  std::vector<cd> amps;
  for (const auto& e : doc) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_string() || !e[1].is_number() || !e[2].is_number())
      throw std::invalid_argument("state entries must be [bitstring, re, im]");
    const auto cfg = FockConfiguration::from_string(e[0].get<std::string>());
    if (n < 0) n = cfg.size();
    if (cfg.size() != n) throw std::invalid_argument("state entries differ in length");
    codes.push_back(cfg.code());
    amps.emplace_back(e[1].get<double>(), e[2].get<double>());
  }
  return StateVector::superposition(n, codes, amps);
}

StateVector read_state_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open state file " + path);
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("state file " + path + ": " + e.what());
  }
  return parse_state_json(doc);
}

nlohmann::json state_json(const StateVector& psi) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < psi.codes.size(); ++i) {
    const cd a = psi.amplitudes[static_cast<Eigen::Index>(i)];
    out.push_back({FockConfiguration::from_code(psi.codes[i], psi.n_sites).to_string(), a.real(), a.imag()});
  }
  return out;
}

}  // namespace zeno
