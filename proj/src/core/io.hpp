#pragma once

#include <string>

#include "core/matrix.hpp"

namespace rankkit::io {

// Binary matrix layout, little-endian throughout:
//   magic   "FMAT"  (4 bytes)
//   version u16     (currently 1)
//   rows    u64
//   cols    u64
//   payload rows*cols f64, row-major
// Read rejects wrong magic, unsupported versions, truncated payloads and
// trailing bytes.
Matrix read_matrix_binary(const std::string& path);
void write_matrix_binary(const Matrix& m, const std::string& path);

// Comma-separated values, one row per line. Writing uses 17 significant
// digits so values round-trip bit-exactly. Reading rejects ragged rows and
// unparseable cells, naming the offending line.
Matrix read_matrix_csv(const std::string& path, bool skip_header);
void write_matrix_csv(const Matrix& m, const std::string& path);

// format: "binary" or "csv".
Matrix read_matrix(const std::string& path, const std::string& format,
                   bool skip_header = false);
void write_matrix(const Matrix& m, const std::string& path,
                  const std::string& format);

// One integer label per line.
Labels read_labels(const std::string& path);
void write_labels(const Labels& labels, const std::string& path);

// Shortest representation that still round-trips a double exactly.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace rankkit::io
