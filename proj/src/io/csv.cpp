#include "mcle/io/csv.hpp"

#include "mcle/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <istream>

namespace mcle::io {

std::optional<std::size_t> CsvTable::find_column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t CsvTable::column(const std::string& name) const {
    if (auto c = find_column(name)) {
        return *c;
    }
    throw InputError(source + ": missing column '" + name + "'");
}

std::string CsvTable::where(std::size_t row) const {
    return source + ":" + std::to_string(lines.at(row));
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

} // namespace

CsvTable read_csv(std::istream& in, const std::string& source, bool has_header) {
    CsvTable table;
    table.source = source;

    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    bool record_has_content = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_field = [&] {
        record.push_back(was_quoted ? field : trim(field));
        field.clear();
        was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = !record_has_content && record.size() == 1 && record[0].empty();
        if (!blank) {
            if (table.header.empty() && !has_header) {
                for (std::size_t i = 0; i < record.size(); ++i) {
                    table.header.push_back("c" + std::to_string(i));
                }
            }
            if (table.header.empty()) {
                table.header = std::move(record);
            } else {
                if (record.size() != table.header.size()) {
                    throw InputError(fmt::format("{}:{}: expected {} fields, found {}", source, record_line,
                                                 table.header.size(), record.size()));
                }
                table.rows.push_back(std::move(record));
                table.lines.push_back(record_line);
            }
        }
        record.clear();
        record_has_content = false;
    };

    char c;
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!trim(field).empty()) {
                throw InputError(fmt::format("{}:{}: stray quote inside unquoted field", source, line));
            }
            field.clear();
            in_quotes = true;
            was_quoted = true;
            record_has_content = true;
            break;
        case ',':
            end_field();
            record_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            end_record();
            ++line;
            record_line = line;
            break;
        default:
            if (was_quoted && c != ' ' && c != '\t') {
                throw InputError(fmt::format("{}:{}: text after closing quote", source, line));
            }
            field.push_back(c);
            record_has_content = true;
        }
    }
    if (in_quotes) {
        throw InputError(fmt::format("{}:{}: unterminated quoted field", source, record_line));
    }
    if (record_has_content || !field.empty()) {
        end_record();
    }
    if (table.header.empty()) {
        throw InputError(source + ": empty file");
    }
    return table;
}

CsvTable read_csv_file(const std::filesystem::path& path, bool has_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    return read_csv(in, path.string(), has_header);
}

std::string format_double(double v) {
    return fmt::format("{:.17g}", v);
}

double parse_double(const CsvTable& table, std::size_t row, std::size_t col) {
    const std::string& s = table.rows.at(row).at(col);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw InputError(fmt::format("{}: column '{}': '{}' is not a number", table.where(row), table.header.at(col), s));
    }
    return v;
}

long long parse_integer(const CsvTable& table, std::size_t row, std::size_t col) {
    const std::string& s = table.rows.at(row).at(col);
    long long v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw InputError(
            fmt::format("{}: column '{}': '{}' is not an integer", table.where(row), table.header.at(col), s));
    }
    return v;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out_ << ',';
        }
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n\r") != std::string::npos || (!f.empty() && (f.front() == ' ' || f.back() == ' '))) {
            out_ << '"';
            for (char c : f) {
                if (c == '"') {
                    out_ << '"';
                }
                out_ << c;
            }
            out_ << '"';
        } else {
            out_ << f;
        }
    }
    out_ << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    return out;
}

} // namespace mcle::io
