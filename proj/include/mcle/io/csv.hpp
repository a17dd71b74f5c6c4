#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mcle::io {

/// Parsed CSV with a header row. Quoted fields may contain commas, doubled
/// quotes and line breaks. Blank lines are skipped.
struct CsvTable {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based line on which each row starts.
    std::vector<std::size_t> lines;

    std::optional<std::size_t> find_column(const std::string& name) const;
    /// Throws InputError naming the source when the column is missing.
    std::size_t column(const std::string& name) const;
    /// "<source>:<line>" for error messages.
    std::string where(std::size_t row) const;
};

/// With `has_header` false the columns are named c0, c1, ... after the width
/// of the first record, which is kept as data.
CsvTable read_csv(std::istream& in, const std::string& source, bool has_header = true);
CsvTable read_csv_file(const std::filesystem::path& path, bool has_header = true);

/// Shortest text that parses back to the same double ("%.17g").
std::string format_double(double v);
double parse_double(const CsvTable& table, std::size_t row, std::size_t col);
long long parse_integer(const CsvTable& table, std::size_t row, std::size_t col);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
};

/// Opens `path` for writing, creating parent directories; throws InputError
/// when that fails.
std::ofstream open_output(const std::filesystem::path& path);

} // namespace mcle::io
