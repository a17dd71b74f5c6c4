#include "mcle/cli/commands.hpp"

#include "mcle/error.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <ostream>

namespace mcle::cli {

namespace {

void print_report(std::ostream& out, const Report& report) {
    for (const auto& [k, v] : report) {
        out << k << " = " << v << '\n';
    }
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-component logistic dynamics: walker ensembles, rank laws, network growth, share forecasts"};
    app.require_subcommand(1);
    std::string output_dir;
    app.add_option("-o,--output-dir", output_dir, "Directory for output files (default: $MCLE_OUTPUT_DIR or .)");

    WalkersConfig walkers_cfg;
    std::string policy = "project";
    auto* walkers = app.add_subcommand("walkers", "Random-walker ensemble relaxed to its equilibrium rank table");
    walkers->add_option("--count", walkers_cfg.count, "Number of walkers")->capture_default_str();
    walkers->add_option("--total", walkers_cfg.total, "Conserved total population N")->capture_default_str();
    walkers->add_option("--floor", walkers_cfg.floor, "Minimum population x0")->capture_default_str();
    walkers->add_option("--dt", walkers_cfg.dt, "Time step")->capture_default_str();
    walkers->add_option("--drift", walkers_cfg.drift, "Mean growth rate")->capture_default_str();
    walkers->add_option("--sigma", walkers_cfg.sigma, "Noise amplitude")->capture_default_str();
    walkers->add_option("--burn-in", walkers_cfg.burn_in, "Steps before sampling")->capture_default_str();
    walkers->add_option("--sample-every", walkers_cfg.sample_every, "Steps between snapshots")->capture_default_str();
    walkers->add_option("--samples", walkers_cfg.samples, "Number of snapshots")->capture_default_str();
    walkers->add_option("--seed", walkers_cfg.seed, "Random seed")->required();
    walkers->add_option("--floor-policy", policy, "project or reject_then_clamp")
        ->check(CLI::IsMember({"project", "reject_then_clamp"}))
        ->capture_default_str();

    RankfitConfig rankfit_cfg;
    auto* rankfit = app.add_subcommand("rankfit", "Fit the MaxEnt rank law to a population table");
    rankfit->add_option("input", rankfit_cfg.input, "CSV with a population column")->required();
    rankfit->add_option("--floor", rankfit_cfg.floor, "Places below this population are discarded")
        ->capture_default_str();
    rankfit->add_option("--drop-top", rankfit_cfg.drop_top, "Number of largest places to exclude")
        ->capture_default_str();

    SfinConfig sfin_cfg;
    auto* sfin = app.add_subcommand("sfin", "Generate a scale-free network with p(c) ~ 1/c");
    sfin->add_option("--nodes", sfin_cfg.nodes, "Number of nodes")->capture_default_str();
    sfin->add_option("--max-degree", sfin_cfg.max_degree, "Largest allowed degree")->capture_default_str();
    sfin->add_option("--seed", sfin_cfg.seed, "Random seed")->required();

    DiffuseConfig diffuse_cfg;
    std::string edges_path;
    auto* diffuse = app.add_subcommand("diffuse", "Cluster-growth processes and diffusion-kernel fit");
    diffuse->add_option("--nodes", diffuse_cfg.nodes, "Number of nodes")->capture_default_str();
    diffuse->add_option("--max-degree", diffuse_cfg.max_degree, "Largest allowed degree")->capture_default_str();
    diffuse->add_option("--seed", diffuse_cfg.seed, "Random seed")->required();
    diffuse->add_option("--processes", diffuse_cfg.processes, "Number of growth processes")->capture_default_str();
    diffuse->add_option("--edges", edges_path, "Use this edge list (u,v) instead of generating a network");
    diffuse->add_option("--density-times", diffuse_cfg.density_times, "Times for the kernel density table")
        ->capture_default_str();

    ForecastConfig forecast_cfg;
    std::string form = "exponential";
    std::string convention = "growth";
    auto* fc = app.add_subcommand("forecast", "Fit growth exponents to a share series and forecast");
    fc->add_option("input", forecast_cfg.input, "CSV with a date column and one column per component")->required();
    fc->add_option("--epoch", forecast_cfg.epoch, "Month (YYYY-MM) taken as t = 0")->capture_default_str();
    fc->add_option("--reference", forecast_cfg.reference, "Reference component (default: first column)");
    fc->add_option("--form", form, "exponential, linear or tabulated")
        ->check(CLI::IsMember({"exponential", "linear", "tabulated"}))
        ->capture_default_str();
    fc->add_option("--convention", convention, "growth or printed")
        ->check(CLI::IsMember({"growth", "printed"}))
        ->capture_default_str();
    fc->add_option("--horizon", forecast_cfg.horizon, "Months to forecast past the last sample")
        ->capture_default_str();
    fc->add_option("--n-prime", forecast_cfg.n_prime_factor, "Forecast total as a multiple of N")
        ->capture_default_str();
    fc->add_option("--total", forecast_cfg.total, "Row total N")->capture_default_str();
    fc->add_option("--row-tolerance", forecast_cfg.row_tolerance, "Allowed relative deviation of row sums")
        ->capture_default_str();
    fc->add_flag("--renormalize", forecast_cfg.renormalize, "Rescale every row to sum to N");

    ItmConfig itm_cfg;
    std::string initial_kind = "chi";
    auto* itm = app.add_subcommand("itm", "Matrix evolution of the amplitudes chi = sqrt(x/N)");
    itm->add_option("matrix", itm_cfg.matrix, "Dense symmetric matrix CSV without header")->required();
    itm->add_option("--initial", itm_cfg.initial, "Initial values (default: uniform)")->delimiter(',');
    itm->add_option("--initial-kind", initial_kind, "chi or populations")
        ->check(CLI::IsMember({"chi", "populations"}))
        ->capture_default_str();
    itm->add_option("--total", itm_cfg.total, "Total N")->capture_default_str();
    itm->add_option("--t-end", itm_cfg.t_end, "Final time")->capture_default_str();
    itm->add_option("--dt", itm_cfg.dt, "Time step")->capture_default_str();
    itm->add_option("--every", itm_cfg.every, "Write every k-th step")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input_error;
    }

    try {
        Report report;
        if (*walkers) {
            walkers_cfg.output_dir = output_dir;
            walkers_cfg.policy =
                policy == "project" ? walkers::FloorPolicy::project : walkers::FloorPolicy::reject_then_clamp;
            report = cmd_walkers(walkers_cfg);
        } else if (*rankfit) {
            rankfit_cfg.output_dir = output_dir;
            report = cmd_rankfit(rankfit_cfg);
        } else if (*sfin) {
            sfin_cfg.output_dir = output_dir;
            report = cmd_sfin(sfin_cfg, err);
        } else if (*diffuse) {
            diffuse_cfg.output_dir = output_dir;
            if (!edges_path.empty()) {
                diffuse_cfg.edges = edges_path;
            }
            report = cmd_diffuse(diffuse_cfg, err);
        } else if (*fc) {
            forecast_cfg.output_dir = output_dir;
            forecast_cfg.form = forecast::parse_fit_form(form);
            forecast_cfg.convention =
                convention == "growth" ? forecast::HConvention::growth : forecast::HConvention::printed;
            report = cmd_forecast(forecast_cfg);
        } else if (*itm) {
            itm_cfg.output_dir = output_dir;
            itm_cfg.initial_is_populations = initial_kind == "populations";
            report = cmd_itm(itm_cfg);
        }
        print_report(out, report);
        return exit_ok;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return exit_numerical_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

} // namespace mcle::cli
