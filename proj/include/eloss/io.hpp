#pragma once

#include <string>
#include <utility>
#include <vector>

#include "eloss/dataset.hpp"
#include "eloss/matrix.hpp"

namespace eloss {

/// Reads a whitespace/comma separated point file, one sample per row.
/// Lines whose first non-space character is '#' are comments. All data rows
/// must have the same number of values; violations raise ParseError with the
/// offending line number.
SampleMatrix load_point_matrix(const std::string& path);

void save_point_matrix(const std::string& path, const SampleMatrix& points,
                       const std::vector<std::string>& comments = {});

/// Named activation matrices, one block per layer. On disk each block starts
/// with "# layer: <name>" followed by that layer's rows.
struct ActivationDump {
  std::vector<std::pair<std::string, SampleMatrix>> layers;
};

ActivationDump load_activation_dump(const std::string& path);
void save_activation_dump(const std::string& path, const ActivationDump& dump);

/// Features plus a trailing label (classification) or target (regression)
/// column.
void save_dataset(const std::string& path, const Dataset& data,
                  const std::vector<std::string>& comments = {});
Dataset load_dataset(const std::string& path, bool regression);

std::string read_text_file(const std::string& path);

/// Writes through a sibling temp file and renames it into place, creating
/// parent directories as needed.
void write_text_atomic(const std::string& path, const std::string& content);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace eloss
