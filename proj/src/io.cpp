#include "lmglab/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "lmglab/constants.hpp"

namespace lmg::io {

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

// CSV cell rendering: numbers at 6 significant digits, strings quoted only
// when they contain a delimiter.
std::string csv_cell(const nlohmann::json& cell) {
  if (cell.is_number_float()) return format_sig(cell.get<double>());
  if (cell.is_number()) return cell.dump();
  std::string s = cell.is_string() ? cell.get<std::string>() : cell.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    quoted += '"';
    return quoted;
  }
  return s;
}

}  // namespace

std::string format_sig(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return buf;
}

Manifest Manifest::create(std::string command) {
  Manifest m;
  m.command = std::move(command);
  m.version = ARTIFACT_VERSION;
  m.timestamp = utc_now();
  return m;
}

void Manifest::add(const std::string& key, const std::string& value) {
  parameters.emplace_back(key, value);
}

void Manifest::add(const std::string& key, double value) {
  parameters.emplace_back(key, format_sig(value, 17));
}

void Manifest::add(const std::string& key, int value) {
  parameters.emplace_back(key, std::to_string(value));
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [key, value] : parameters) params[key] = value;
  nlohmann::json j{{"command", command},
                   {"parameters", params},
                   {"version", version},
                   {"timestamp", timestamp}};
  if (seed) j["seed"] = *seed;
  return j;
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("Table: needs at least one column");
}

Table& Table::add_row(std::vector<nlohmann::json> row) {
  if (row.size() != columns_.size()) {
    throw std::invalid_argument("Table: row width does not match the column count");
  }
  rows_.push_back(std::move(row));
  return *this;
}

void Table::write_csv(std::ostream& os, const Manifest& manifest) const {
  os << "# command: " << manifest.command << '\n';
  os << "# version: " << manifest.version << '\n';
  os << "# timestamp: " << manifest.timestamp << '\n';
  if (manifest.seed) os << "# seed: " << *manifest.seed << '\n';
  for (const auto& [key, value] : manifest.parameters) {
    os << "# " << key << ": " << value << '\n';
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    os << (c ? "," : "") << columns_[c];
  }
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << (c ? "," : "") << csv_cell(row[c]);
    }
    os << '\n';
  }
}

nlohmann::json Table::to_json(const Manifest& manifest) const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : rows_) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) r.push_back(cell);
    rows.push_back(std::move(r));
  }
  return nlohmann::json{{"manifest", manifest.to_json()},
                        {"columns", columns_},
                        {"rows", rows}};
}

std::string resolve_output_path(const std::string& filename) {
  if (filename.empty() || filename == "-" || filename.front() == '/') return filename;
  const char* outdir = std::getenv("LMGLAB_OUTDIR");
  if (outdir == nullptr || *outdir == '\0') return filename;
  std::string dir = outdir;
  if (dir.back() != '/') dir += '/';
  return dir + filename;
}

void write_artifact(const std::string& path, const Table& table,
                    const Manifest& manifest, const std::string& format) {
  if (format != "csv" && format != "json") {
    throw std::invalid_argument("write_artifact: format must be csv or json");
  }
  const std::string resolved = resolve_output_path(path);
  std::ofstream file;
  const bool to_stdout = resolved.empty() || resolved == "-";
  if (!to_stdout) {
    file.open(resolved);
    if (!file) throw std::runtime_error("write_artifact: cannot open " + resolved);
  }
  std::ostream& os = to_stdout ? std::cout : file;
  if (format == "csv") {
    table.write_csv(os, manifest);
  } else {
    os << table.to_json(manifest).dump(2) << '\n';
  }
}

}  // namespace lmg::io
