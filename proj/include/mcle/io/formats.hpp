#pragma once

#include "mcle/core.hpp"
#include "mcle/forecast.hpp"
#include "mcle/io/csv.hpp"
#include "mcle/network.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace mcle::io {

/// Population table: `population` column required, `place_name` optional.
struct PopulationTable {
    std::vector<std::string> names;  // empty strings when absent
    std::vector<double> populations;
};

PopulationTable read_population_csv(const std::filesystem::path& path);
PopulationTable parse_population_table(const CsvTable& table);
void write_population_csv(const std::filesystem::path& path, const PopulationTable& table);

/// Columnar numeric table with named columns; every cell written with 17
/// significant digits so it reads back bit-exact.
struct NumericTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

void write_numeric_table(const std::filesystem::path& path, const NumericTable& table);
NumericTable read_numeric_table(const std::filesystem::path& path);
NumericTable parse_numeric_table(const CsvTable& table);

/// Month index relative to an epoch, both "YYYY-MM" (a trailing "-DD" is ignored).
int months_between(const std::string& epoch, const std::string& date);
std::string add_months(const std::string& epoch, int months);

/// Share series: a `date` column plus one column per component. An optional
/// `t` column, when present, must agree with the date.
forecast::ShareSeries read_share_series(const std::filesystem::path& path, const std::string& epoch,
                                        double total, double sum_tolerance, bool renormalize);
forecast::ShareSeries parse_share_series(const CsvTable& table, const std::string& epoch, double total,
                                         double sum_tolerance, bool renormalize);
void write_share_series(const std::filesystem::path& path, const forecast::ShareSeries& series,
                        const std::string& epoch);

/// Undirected edge list with columns u,v (0-based node ids).
void write_edge_list(const std::filesystem::path& path, const network::Network& net);
std::vector<network::Edge> read_edge_list(const std::filesystem::path& path);

/// Long-format cluster sizes: process_id,seed_node,iteration,size.
void write_processes(const std::filesystem::path& path, const std::vector<network::GrowthProcess>& processes);
std::vector<network::GrowthProcess> read_processes(const std::filesystem::path& path);

/// Population trajectory: t followed by one column per component.
void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory,
                      const std::vector<std::string>& names = {});
Trajectory read_trajectory(const std::filesystem::path& path, double total);

/// Dense matrix without a header row.
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

} // namespace mcle::io
