#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hcdir/types.hpp"

namespace hcdir {

// One parsed TSV row; cells keep their raw text.
struct TsvFile {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a UTF-8 TSV with a mandatory header row. Throws SchemaError with the
// file name and line number on malformed rows.
TsvFile read_tsv(const std::filesystem::path& path, size_t expected_min_cols);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// SHA-256 as a lowercase hex string.
std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& s);
// Hash of a directory: every regular file (sorted by relative path), name and
// content chained together. Stable across runs and machines.
std::string hash_directory(const std::filesystem::path& dir);

// Checkpoint container: a JSON manifest plus named float64 tensors with shape
// headers, all little-endian.
class TensorArchive {
 public:
  void put(const std::string& name, const Eigen::MatrixXd& t);
  const Eigen::MatrixXd& get(const std::string& name) const;
  bool has(const std::string& name) const { return tensors_.count(name) > 0; }
  std::vector<std::string> names() const;

  std::string& manifest() { return manifest_json_; }
  const std::string& manifest() const { return manifest_json_; }

  void save(const std::filesystem::path& path) const;
  static TensorArchive load(const std::filesystem::path& path);

 private:
  std::map<std::string, Eigen::MatrixXd> tensors_;
  std::string manifest_json_;
};

}  // namespace hcdir
