#pragma once

#include "mcle/forecast.hpp"
#include "mcle/walkers.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mcle::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_input_error = 2,
    exit_numerical_error = 3,
};

/// Output directory used when none is given: $MCLE_OUTPUT_DIR, else ".".
std::filesystem::path default_output_dir();

/// Two-column quantity,value report.
using Report = std::vector<std::pair<std::string, std::string>>;

struct WalkersConfig {
    std::size_t count = 1000;
    double total = 6e6;
    double floor = 150.0;
    double dt = 0.03;
    double drift = 0.0;
    double sigma = 1.0;
    std::uint64_t burn_in = 100000;
    std::uint64_t sample_every = 1000;
    std::uint64_t samples = 100;
    std::uint64_t seed = 0;
    walkers::FloorPolicy policy = walkers::FloorPolicy::project;
    std::filesystem::path output_dir;
};

struct RankfitConfig {
    std::filesystem::path input;
    double floor = 150.0;
    std::size_t drop_top = 4;
    std::filesystem::path output_dir;
};

struct SfinConfig {
    std::size_t nodes = 20000;
    std::size_t max_degree = 100;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
};

struct DiffuseConfig {
    std::size_t nodes = 20000;
    std::size_t max_degree = 100;
    std::uint64_t seed = 0;
    std::size_t processes = 500;
    /// When set, the network is read from this edge list instead of generated.
    std::optional<std::filesystem::path> edges;
    std::vector<double> density_times{1.0, 3.0, 6.0};
    std::filesystem::path output_dir;
};

struct ForecastConfig {
    std::filesystem::path input;
    std::string epoch = "2012-03";
    std::string reference;  // empty: first component
    forecast::FitForm form = forecast::FitForm::exponential;
    forecast::HConvention convention = forecast::HConvention::growth;
    int horizon = 60;
    double n_prime_factor = 1.0;
    double total = 100.0;
    double row_tolerance = 0.05;
    bool renormalize = false;
    std::filesystem::path output_dir;
};

struct ItmConfig {
    std::filesystem::path matrix;
    /// Initial amplitudes, or populations when `initial_is_populations`;
    /// empty means the uniform state.
    std::vector<double> initial;
    bool initial_is_populations = false;
    double total = 1.0;
    double t_end = 10.0;
    double dt = 1e-3;
    std::size_t every = 10;
    std::filesystem::path output_dir;
};

/// Each command validates its paths first, runs, writes its files plus
/// manifest.json into the output directory and returns the report it wrote.
Report cmd_walkers(const WalkersConfig& config);
Report cmd_rankfit(const RankfitConfig& config);
Report cmd_sfin(const SfinConfig& config, std::ostream& warnings);
Report cmd_diffuse(const DiffuseConfig& config, std::ostream& warnings);
Report cmd_forecast(const ForecastConfig& config);
Report cmd_itm(const ItmConfig& config);

/// Full command-line entry point; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mcle::cli
