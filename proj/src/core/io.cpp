#include "core/io.hpp"

#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "core/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "matrix file io assumes a little-endian host");

namespace rankkit::io {

namespace {

constexpr char kMagic[4] = {'F', 'M', 'A', 'T'};
constexpr std::uint16_t kVersion = 1;

[[noreturn]] void throw_io(const std::string& path, const std::string& what) {
    throw_error(errc::io, path + ": " + what);
}

[[noreturn]] void throw_format(const std::string& path,
                               const std::string& what) {
    throw_error(errc::format, path + ": " + what);
}

void read_exact(std::ifstream& in, void* dst, std::size_t bytes,
                const std::string& path, const char* what) {
    in.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes)
        throw_format(path, std::string("truncated file while reading ") + what);
}

} // namespace

Matrix read_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io(path, "cannot open for reading");

    char magic[4];
    read_exact(in, magic, sizeof(magic), path, "magic");
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw_format(path, "bad magic, not a matrix file");

    std::uint16_t version = 0;
    read_exact(in, &version, sizeof(version), path, "version");
    if (version != kVersion) {
        std::ostringstream msg;
        msg << "unsupported matrix file version " << version;
        throw_format(path, msg.str());
    }

    std::uint64_t rows = 0, cols = 0;
    read_exact(in, &rows, sizeof(rows), path, "row count");
    read_exact(in, &cols, sizeof(cols), path, "column count");

    if (cols != 0 && rows > SIZE_MAX / cols / sizeof(double))
        throw_format(path, "matrix dimensions overflow");

    std::vector<double> values(static_cast<std::size_t>(rows * cols));
    if (!values.empty())
        read_exact(in, values.data(), values.size() * sizeof(double), path,
                   "payload");

    // Trailing bytes mean the header lied about the shape.
    char extra;
    in.read(&extra, 1);
    if (in.gcount() != 0)
        throw_format(path, "trailing bytes after matrix payload");

    return Matrix(static_cast<std::size_t>(rows),
                  static_cast<std::size_t>(cols), std::move(values));
}

void write_matrix_binary(const Matrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io(path, "cannot open for writing");

    const std::uint64_t rows = m.rows(), cols = m.cols();
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    if (m.size() != 0)
        out.write(reinterpret_cast<const char*>(m.data()),
                  static_cast<std::streamsize>(m.size() * sizeof(double)));
    out.flush();
    if (!out) throw_io(path, "write failed");
}

Matrix read_matrix_csv(const std::string& path, bool skip_header) {
    std::ifstream in(path);
    if (!in) throw_io(path, "cannot open for reading");

    std::vector<double> values;
    std::size_t rows = 0, cols = 0;
    std::string line;
    std::size_t line_number = 0;

    while (std::getline(in, line)) {
        ++line_number;
        if (skip_header && line_number == 1) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;

        std::size_t row_cols = 0;
        const char* cursor = line.c_str();
        for (;;) {
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(cursor, &end);
            if (end == cursor) {
                std::ostringstream msg;
                msg << "line " << line_number << ": cannot parse value at "
                    << "column " << (row_cols + 1);
                throw_format(path, msg.str());
            }
            values.push_back(v);
            ++row_cols;
            while (*end == ' ' || *end == '\t') ++end;
            if (*end == ',') {
                cursor = end + 1;
                continue;
            }
            if (*end == '\0') break;
            std::ostringstream msg;
            msg << "line " << line_number << ": unexpected character '" << *end
                << "'";
            throw_format(path, msg.str());
        }

        if (rows == 0) {
            cols = row_cols;
        } else if (row_cols != cols) {
            std::ostringstream msg;
            msg << "line " << line_number << ": expected " << cols
                << " values, found " << row_cols;
            throw_format(path, msg.str());
        }
        ++rows;
    }

    return Matrix(rows, cols, std::move(values));
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw_io(path, "cannot open for writing");
    std::string line;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        line.clear();
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) line += ',';
            line += format_double(m(r, c));
        }
        line += '\n';
        out << line;
    }
    out.flush();
    if (!out) throw_io(path, "write failed");
}

Matrix read_matrix(const std::string& path, const std::string& format,
                   bool skip_header) {
    if (format == "binary") return read_matrix_binary(path);
    if (format == "csv") return read_matrix_csv(path, skip_header);
    throw_error(errc::invalid_argument,
                "unknown matrix format '" + format + "' (binary or csv)");
}

void write_matrix(const Matrix& m, const std::string& path,
                  const std::string& format) {
    if (format == "binary") return write_matrix_binary(m, path);
    if (format == "csv") return write_matrix_csv(m, path);
    throw_error(errc::invalid_argument,
                "unknown matrix format '" + format + "' (binary or csv)");
}

Labels read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_io(path, "cannot open for reading");
    Labels labels;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        errno = 0;
        char* end = nullptr;
        const long long v = std::strtoll(line.c_str(), &end, 10);
        while (end && (*end == ' ' || *end == '\t')) ++end;
        if (end == line.c_str() || *end != '\0' || errno == ERANGE) {
            std::ostringstream msg;
            msg << "line " << line_number << ": cannot parse label";
            throw_format(path, msg.str());
        }
        labels.push_back(static_cast<std::int64_t>(v));
    }
    return labels;
}

void write_labels(const Labels& labels, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw_io(path, "cannot open for writing");
    for (auto v : labels) out << v << '\n';
    out.flush();
    if (!out) throw_io(path, "write failed");
}

std::string format_double(double v) {
    // %.17g always round-trips; prefer the shortest precision that does.
    char buf[40];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io(path, "cannot open for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io(path, "cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw_io(path, "write failed");
}

} // namespace rankkit::io
