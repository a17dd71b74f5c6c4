#include "mcle/io/formats.hpp"

#include "mcle/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

namespace mcle::io {

PopulationTable parse_population_table(const CsvTable& table) {
    const std::size_t pop = table.column("population");
    const auto name = table.find_column("place_name");
    PopulationTable out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const double v = parse_double(table, r, pop);
        if (!std::isfinite(v) || v < 0.0) {
            throw InputError(fmt::format("{}: population must be finite and non-negative", table.where(r)));
        }
        out.populations.push_back(v);
        out.names.push_back(name ? table.rows[r][*name] : std::string());
    }
    if (out.populations.empty()) {
        throw InputError(table.source + ": no population rows");
    }
    return out;
}

PopulationTable read_population_csv(const std::filesystem::path& path) {
    return parse_population_table(read_csv_file(path));
}

void write_population_csv(const std::filesystem::path& path, const PopulationTable& table) {
    auto out = open_output(path);
    CsvWriter w(out);
    w.row({"place_name", "population"});
    for (std::size_t i = 0; i < table.populations.size(); ++i) {
        w.row({i < table.names.size() ? table.names[i] : std::string(), format_double(table.populations[i])});
    }
}

std::size_t NumericTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw InputError("numeric table has no column '" + name + "'");
}

void write_numeric_table(const std::filesystem::path& path, const NumericTable& table) {
    auto out = open_output(path);
    CsvWriter w(out);
    w.row(table.header);
    std::vector<std::string> fields;
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) {
            throw InputError("numeric table row width does not match the header");
        }
        fields.clear();
        for (double v : row) {
            fields.push_back(format_double(v));
        }
        w.row(fields);
    }
}

NumericTable parse_numeric_table(const CsvTable& table) {
    NumericTable out;
    out.header = table.header;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::vector<double> row(table.header.size());
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] = parse_double(table, r, c);
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

NumericTable read_numeric_table(const std::filesystem::path& path) {
    return parse_numeric_table(read_csv_file(path));
}

namespace {

void parse_year_month(const std::string& s, int& year, int& month) {
    auto fail = [&] { throw InputError("'" + s + "' is not a YYYY-MM date"); };
    if (s.size() < 7 || s[4] != '-') {
        fail();
    }
    const char* b = s.data();
    if (std::from_chars(b, b + 4, year).ptr != b + 4 || std::from_chars(b + 5, b + 7, month).ptr != b + 7) {
        fail();
    }
    if (month < 1 || month > 12 || (s.size() > 7 && s[7] != '-')) {
        fail();
    }
}

} // namespace

int months_between(const std::string& epoch, const std::string& date) {
    int y0 = 0, m0 = 0, y = 0, m = 0;
    parse_year_month(epoch, y0, m0);
    parse_year_month(date, y, m);
    return (y - y0) * 12 + (m - m0);
}

std::string add_months(const std::string& epoch, int months) {
    int y = 0, m = 0;
    parse_year_month(epoch, y, m);
    int idx = y * 12 + (m - 1) + months;
    const int year = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
    const int month = idx - year * 12 + 1;
    return fmt::format("{:04d}-{:02d}", year, month);
}

forecast::ShareSeries parse_share_series(const CsvTable& table, const std::string& epoch, double total,
                                         double sum_tolerance, bool renormalize) {
    const std::size_t date_col = table.column("date");
    const auto t_col = table.find_column("t");
    std::vector<std::size_t> cols;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c != date_col && (!t_col || c != *t_col)) {
            cols.push_back(c);
            names.push_back(table.header[c]);
        }
    }
    if (names.empty()) {
        throw InputError(table.source + ": no component columns");
    }
    if (table.rows.empty()) {
        throw InputError(table.source + ": no data rows");
    }
    std::vector<double> times;
    std::vector<std::vector<double>> shares;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        int t = 0;
        try {
            t = months_between(epoch, table.rows[r][date_col]);
        } catch (const InputError& e) {
            throw InputError(table.where(r) + ": " + e.what());
        }
        if (t_col && parse_double(table, r, *t_col) != static_cast<double>(t)) {
            throw InputError(table.where(r) + ": t column disagrees with date");
        }
        std::vector<double> row;
        for (std::size_t c : cols) {
            const double v = parse_double(table, r, c);
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw InputError(fmt::format("{}: non-positive share {} for {}", table.where(r), table.rows[r][c],
                                             table.header[c]));
            }
            row.push_back(v);
        }
        if (renormalize) {
            const double s = std::accumulate(row.begin(), row.end(), 0.0);
            if (std::abs(s - total) > sum_tolerance * total) {
                throw InputError(fmt::format("{}: shares sum to {}, outside tolerance of {}", table.where(r), s, total));
            }
            for (double& v : row) {
                v *= total / s;
            }
        }
        times.push_back(static_cast<double>(t));
        shares.push_back(std::move(row));
    }
    try {
        return forecast::ShareSeries(std::move(names), std::move(times), std::move(shares), total,
                                     renormalize ? 1e-12 : sum_tolerance);
    } catch (const InputError& e) {
        throw InputError(table.source + ": " + e.what());
    }
}

forecast::ShareSeries read_share_series(const std::filesystem::path& path, const std::string& epoch, double total,
                                        double sum_tolerance, bool renormalize) {
    return parse_share_series(read_csv_file(path), epoch, total, sum_tolerance, renormalize);
}

void write_share_series(const std::filesystem::path& path, const forecast::ShareSeries& series,
                        const std::string& epoch) {
    auto out = open_output(path);
    CsvWriter w(out);
    std::vector<std::string> header{"date", "t"};
    header.insert(header.end(), series.components().begin(), series.components().end());
    w.row(header);
    for (std::size_t k = 0; k < series.sample_count(); ++k) {
        const double t = series.times()[k];
        std::vector<std::string> fields;
        fields.push_back(t == std::round(t) ? add_months(epoch, static_cast<int>(t)) : std::string());
        fields.push_back(format_double(t));
        for (double v : series.shares()[k]) {
            fields.push_back(format_double(v));
        }
        w.row(fields);
    }
}

void write_edge_list(const std::filesystem::path& path, const network::Network& net) {
    auto out = open_output(path);
    CsvWriter w(out);
    w.row({"u", "v"});
    for (const auto& [u, v] : net.edges()) {
        w.row({std::to_string(u), std::to_string(v)});
    }
}

std::vector<network::Edge> read_edge_list(const std::filesystem::path& path) {
    const auto table = read_csv_file(path);
    const std::size_t u = table.column("u");
    const std::size_t v = table.column("v");
    std::vector<network::Edge> edges;
    edges.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto a = parse_integer(table, r, u);
        const auto b = parse_integer(table, r, v);
        if (a < 0 || b < 0 || a > 0xffffffffLL || b > 0xffffffffLL) {
            throw InputError(table.where(r) + ": node id out of range");
        }
        edges.emplace_back(static_cast<network::NodeId>(a), static_cast<network::NodeId>(b));
    }
    return edges;
}

void write_processes(const std::filesystem::path& path, const std::vector<network::GrowthProcess>& processes) {
    auto out = open_output(path);
    CsvWriter w(out);
    w.row({"process_id", "seed_node", "iteration", "size"});
    for (std::size_t p = 0; p < processes.size(); ++p) {
        const auto& proc = processes[p];
        for (std::size_t t = 0; t < proc.sizes.size(); ++t) {
            w.row({std::to_string(p), std::to_string(proc.seed_node), std::to_string(t),
                   std::to_string(proc.sizes[t])});
        }
    }
}

std::vector<network::GrowthProcess> read_processes(const std::filesystem::path& path) {
    const auto table = read_csv_file(path);
    const std::size_t pid = table.column("process_id");
    const std::size_t seed = table.column("seed_node");
    const std::size_t it = table.column("iteration");
    const std::size_t size = table.column("size");
    std::vector<network::GrowthProcess> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto p = parse_integer(table, r, pid);
        const auto t = parse_integer(table, r, it);
        const auto s = parse_integer(table, r, size);
        const auto sn = parse_integer(table, r, seed);
        if (p < 0 || t < 0 || s < 0 || sn < 0) {
            throw InputError(table.where(r) + ": negative value");
        }
        if (static_cast<std::size_t>(p) == out.size()) {
            out.push_back(network::GrowthProcess{static_cast<network::NodeId>(sn), {}});
        } else if (static_cast<std::size_t>(p) + 1 != out.size()) {
            throw InputError(table.where(r) + ": process ids must be contiguous and ascending");
        }
        auto& proc = out.back();
        if (static_cast<std::size_t>(t) != proc.sizes.size()) {
            throw InputError(table.where(r) + ": iterations must start at 0 and be consecutive");
        }
        proc.sizes.push_back(static_cast<std::size_t>(s));
    }
    return out;
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory,
                      const std::vector<std::string>& names) {
    NumericTable table;
    table.header.push_back("t");
    const std::size_t n = trajectory.empty() ? names.size() : trajectory.front().size();
    for (std::size_t i = 0; i < n; ++i) {
        table.header.push_back(i < names.size() ? names[i] : fmt::format("x_{}", i));
    }
    for (const auto& s : trajectory) {
        std::vector<double> row{s.time()};
        row.insert(row.end(), s.values().begin(), s.values().end());
        table.rows.push_back(std::move(row));
    }
    write_numeric_table(path, table);
}

Trajectory read_trajectory(const std::filesystem::path& path, double total) {
    const auto table = read_numeric_table(path);
    const std::size_t tc = table.column("t");
    Trajectory out;
    for (const auto& row : table.rows) {
        std::vector<double> x;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c != tc) {
                x.push_back(row[c]);
            }
        }
        out.emplace_back(std::move(x), total, row[tc]);
    }
    return out;
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
    const auto table = read_csv_file(path, false);
    if (table.rows.empty()) {
        throw InputError(path.string() + ": empty matrix");
    }
    const std::size_t width = table.header.size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(table, r, c);
        }
    }
    return m;
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    auto out = open_output(path);
    CsvWriter w(out);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<std::string> fields;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            fields.push_back(format_double(m(r, c)));
        }
        w.row(fields);
    }
}

} // namespace mcle::io
