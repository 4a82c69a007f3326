#pragma once
// Artifact plumbing: CSV/JSON tables with run manifests.  Every artifact
// carries the command line, the parameter values, the seed when the run is
// stochastic, the artifact version, and a timestamp; CSV bodies are
// byte-identical across repeated runs (the manifest lives in a comment
// header), and JSON keeps full double precision.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace lmg::io {

// Shortest decimal representation at `digits` significant digits
// ('.' separator, no grouping).
std::string format_sig(double value, int digits = 6);

struct Manifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::optional<std::uint64_t> seed;
  std::string version;
  std::string timestamp;  // UTC, ISO 8601

  static Manifest create(std::string command);

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, int value);

  nlohmann::json to_json() const;
};

// Fixed-column table; cells are JSON scalars so CSV can round to 6
// significant digits while JSON keeps full precision.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  Table& add_row(std::vector<nlohmann::json> row);
  std::size_t n_rows() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }

  // Manifest as '# key: value' comment lines, then header row, then data.
  void write_csv(std::ostream& os, const Manifest& manifest) const;
  nlohmann::json to_json(const Manifest& manifest) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<nlohmann::json>> rows_;
};

// Resolves a relative output path against $LMGLAB_OUTDIR when set.
std::string resolve_output_path(const std::string& filename);

// Writes the table to `path` ("" or "-" means stdout) in the given format.
void write_artifact(const std::string& path, const Table& table,
                    const Manifest& manifest, const std::string& format);

}  // namespace lmg::io
