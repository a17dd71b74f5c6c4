#include "mcle/cli/commands.hpp"

#include "mcle/core.hpp"
#include "mcle/error.hpp"
#include "mcle/io/csv.hpp"
#include "mcle/io/formats.hpp"
#include "mcle/itm.hpp"
#include "mcle/maxent.hpp"
#include "mcle/network.hpp"
#include "mcle/rng.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>

#ifndef MCLE_VERSION
#define MCLE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace mcle::cli {

fs::path default_output_dir() {
    if (const char* env = std::getenv("MCLE_OUTPUT_DIR"); env != nullptr && *env != '\0') {
        return fs::path(env);
    }
    return fs::path(".");
}

namespace {

using io::format_double;
using nlohmann::ordered_json;

fs::path resolve_output(const fs::path& dir) {
    const fs::path out = dir.empty() ? default_output_dir() : dir;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!fs::is_directory(out)) {
        throw InputError("cannot create output directory " + out.string());
    }
    return out;
}

void require_input(const fs::path& path, const char* what) {
    if (path.empty()) {
        throw InputError(std::string("missing ") + what);
    }
    if (!fs::is_regular_file(path)) {
        throw InputError(std::string(what) + " not found: " + path.string());
    }
}

void write_report(const fs::path& path, const Report& report) {
    auto out = io::open_output(path);
    io::CsvWriter w(out);
    w.row({"quantity", "value"});
    for (const auto& [k, v] : report) {
        w.row({k, v});
    }
}

void write_manifest(const fs::path& dir, const std::string& command, ordered_json config,
                    const std::vector<std::string>& outputs) {
    ordered_json m;
    m["command"] = command;
    m["config"] = std::move(config);
    m["outputs"] = outputs;
    m["versions"] = {
        {"mcle", MCLE_VERSION},
        {"compiler", __VERSION__},
        {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
        {"fmt", FMT_VERSION},
    };
    auto out = io::open_output(dir / "manifest.json");
    out << m.dump(2) << '\n';
}

const char* policy_name(walkers::FloorPolicy p) {
    return p == walkers::FloorPolicy::project ? "project" : "reject_then_clamp";
}

std::string opt_double(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("undefined");
}

} // namespace

Report cmd_walkers(const WalkersConfig& c) {
    if (c.count < 2) {
        throw InputError("walkers: need at least 2 walkers, got " + std::to_string(c.count));
    }
    const fs::path dir = resolve_output(c.output_dir);
    const auto model = maxent::solve_lambda(c.total, c.count, c.floor);

    auto ens = walkers::WalkerEnsemble::uniform(c.count, c.total, c.floor, c.dt, c.drift, c.sigma, c.seed, c.policy);
    const auto stats = walkers::run_to_equilibrium(ens, c.burn_in, c.sample_every, c.samples);
    const auto& table = stats.rank_table;
    const auto fit = maxent::fit_lambda(table, c.floor);

    io::NumericTable ranks;
    ranks.header = {"rank", "population", "analytic_population"};
    for (std::size_t i = 0; i < table.size(); ++i) {
        ranks.rows.push_back({table.ranks[i], table.populations[i], maxent::analytic_rank(model, table.ranks[i])});
    }
    io::write_numeric_table(dir / "rank.csv", ranks);

    io::NumericTable snapshot;
    snapshot.header = {"walker_index", "x"};
    const auto final_x = ens.populations();
    for (std::size_t i = 0; i < final_x.size(); ++i) {
        snapshot.rows.push_back({static_cast<double>(i), final_x[i]});
    }
    io::write_numeric_table(dir / "snapshot.csv", snapshot);

    Report report{
        {"walkers", std::to_string(c.count)},
        {"total", format_double(c.total)},
        {"floor", format_double(c.floor)},
        {"dt", format_double(c.dt)},
        {"sigma", format_double(c.sigma)},
        {"drift", format_double(c.drift)},
        {"floor_policy", policy_name(c.policy)},
        {"seed", std::to_string(c.seed)},
        {"steps", std::to_string(stats.step_count)},
        {"lambda_analytic", format_double(model.lambda())},
        {"lambda_per_person", format_double(model.rate_per_person())},
        {"lambda_fit", format_double(fit.lambda)},
        {"lambda_fit_stderr", format_double(fit.standard_error)},
        {"ks_distance", format_double(maxent::ks_distance(table, model))},
        {"corr_u_udot2", opt_double(stats.corr_coeff)},
    };
    write_report(dir / "diagnostics.csv", report);
    write_manifest(dir, "walkers",
                   {{"count", c.count},
                    {"total", c.total},
                    {"floor", c.floor},
                    {"dt", c.dt},
                    {"drift", c.drift},
                    {"sigma", c.sigma},
                    {"burn_in", c.burn_in},
                    {"sample_every", c.sample_every},
                    {"samples", c.samples},
                    {"seed", c.seed},
                    {"floor_policy", policy_name(c.policy)}},
                   {"rank.csv", "snapshot.csv", "diagnostics.csv"});
    return report;
}

Report cmd_rankfit(const RankfitConfig& c) {
    require_input(c.input, "population file");
    const fs::path dir = resolve_output(c.output_dir);
    const auto data = io::read_population_csv(c.input);

    std::vector<double> kept;
    std::size_t below = 0;
    for (double p : data.populations) {
        if (p < c.floor) {
            ++below;
        } else {
            kept.push_back(p);
        }
    }
    std::sort(kept.begin(), kept.end(), std::greater<>());
    const std::size_t top = std::min(c.drop_top, kept.size());
    kept.erase(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(top));
    if (kept.size() < 10) {
        throw InputError(fmt::format("rankfit: {} places remain after filtering, need at least 10", kept.size()));
    }

    const auto table = maxent::make_rank_table(kept, c.floor);
    const auto solved = maxent::solve_lambda(table.total, table.size(), c.floor);
    const auto fit = maxent::fit_lambda(table, c.floor);
    const maxent::MaxEntModel fitted(fit.lambda, c.floor, table.size());

    io::NumericTable ranks;
    ranks.header = {"rank", "population", "solved_population", "fitted_population"};
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double r = table.ranks[i];
        ranks.rows.push_back(
            {r, table.populations[i], maxent::analytic_rank(solved, r), maxent::analytic_rank(fitted, r)});
    }
    io::write_numeric_table(dir / "rank.csv", ranks);

    Report report{
        {"places_read", std::to_string(data.populations.size())},
        {"dropped_below_floor", std::to_string(below)},
        {"dropped_largest", std::to_string(top)},
        {"places_used", std::to_string(table.size())},
        {"total_used", format_double(table.total)},
        {"floor", format_double(c.floor)},
        {"lambda_solved", format_double(solved.lambda())},
        {"lambda_fit", format_double(fit.lambda)},
        {"lambda_fit_stderr", format_double(fit.standard_error)},
        {"fit_rss", format_double(fit.rss)},
        {"ks_solved", format_double(maxent::ks_distance(table, solved))},
        {"ks_fit", format_double(maxent::ks_distance(table, fitted))},
    };
    write_report(dir / "rankfit.csv", report);
    write_manifest(dir, "rankfit",
                   {{"input", c.input.string()}, {"floor", c.floor}, {"drop_top", c.drop_top}},
                   {"rank.csv", "rankfit.csv"});
    return report;
}

namespace {

Report network_report(const network::Network& net, std::ostream& warnings, std::vector<std::size_t>& hist) {
    hist = network::degree_histogram(net);
    const std::size_t hi = std::max<std::size_t>(3, std::min(net.max_degree() / 2, hist.size() - 1));
    const double slope = network::loglog_slope(hist, 2, hi);
    const auto comps = network::component_sizes(net);
    if (comps.size() > 1) {
        std::string sizes;
        for (std::size_t i = 0; i < std::min<std::size_t>(comps.size(), 10); ++i) {
            sizes += (i ? " " : "") + std::to_string(comps[i]);
        }
        warnings << fmt::format("warning: network is disconnected: {} components, largest sizes {}{}\n",
                                comps.size(), sizes, comps.size() > 10 ? " ..." : "");
    }
    return {
        {"nodes", std::to_string(net.node_count())},
        {"edges", std::to_string(net.edge_count())},
        {"max_degree", std::to_string(net.max_degree())},
        {"degree_loglog_slope", format_double(slope)},
        {"degree_slope_check", std::abs(slope + 1.0) <= 0.1 ? "PASS" : "FAIL"},
        {"components", std::to_string(comps.size())},
        {"largest_component", std::to_string(comps.front())},
    };
}

void write_histogram(const fs::path& path, const std::vector<std::size_t>& hist) {
    io::NumericTable t;
    t.header = {"degree", "count"};
    for (std::size_t c = 1; c < hist.size(); ++c) {
        t.rows.push_back({static_cast<double>(c), static_cast<double>(hist[c])});
    }
    io::write_numeric_table(path, t);
}

} // namespace

Report cmd_sfin(const SfinConfig& c, std::ostream& warnings) {
    const fs::path dir = resolve_output(c.output_dir);
    const auto net = network::generate_sfin(c.nodes, c.max_degree, c.seed);
    std::vector<std::size_t> hist;
    Report report = network_report(net, warnings, hist);
    report.insert(report.begin() + 3, {"seed", std::to_string(c.seed)});
    io::write_edge_list(dir / "edges.csv", net);
    write_histogram(dir / "degree_histogram.csv", hist);
    write_report(dir / "network.csv", report);
    write_manifest(dir, "sfin", {{"nodes", c.nodes}, {"max_degree", c.max_degree}, {"seed", c.seed}},
                   {"edges.csv", "degree_histogram.csv", "network.csv"});
    return report;
}

Report cmd_diffuse(const DiffuseConfig& c, std::ostream& warnings) {
    if (c.edges) {
        require_input(*c.edges, "edge list");
    }
    if (c.processes < 30) {
        throw InputError(fmt::format("diffuse: kernel fit needs at least 30 processes, got {}", c.processes));
    }
    const fs::path dir = resolve_output(c.output_dir);
    const auto net = c.edges ? [&] {
        const auto edges = io::read_edge_list(*c.edges);
        std::size_t max_deg = 0;
        network::Network tmp(c.nodes, edges);
        for (network::NodeId v = 0; v < tmp.node_count(); ++v) {
            max_deg = std::max(max_deg, tmp.degree(v));
        }
        return network::Network(c.nodes, edges, max_deg, c.seed);
    }()
                             : network::generate_sfin(c.nodes, c.max_degree, c.seed);

    std::vector<std::size_t> hist;
    Report report = network_report(net, warnings, hist);

    const auto giant = network::largest_component(net);
    const double total = static_cast<double>(giant.size());
    const CounterRng rng(c.seed);
    std::vector<network::GrowthProcess> processes;
    processes.reserve(c.processes);
    for (std::size_t p = 0; p < c.processes; ++p) {
        const auto pick = static_cast<std::size_t>(rng.uniform(1, p) * static_cast<double>(giant.size()));
        processes.push_back(network::grow_cluster(net, giant[std::min(pick, giant.size() - 1)]));
    }
    const auto fit = network::fit_kernel(std::span<const network::GrowthProcess>(processes), total);
    const auto& k = fit.params;

    io::write_processes(dir / "processes.csv", processes);
    write_histogram(dir / "degree_histogram.csv", hist);

    io::NumericTable median;
    median.header = {"iteration", "median_y", "fitted_y", "median_x", "fitted_x"};
    for (std::size_t t = 0; t < fit.median_y.size(); ++t) {
        const double tt = static_cast<double>(t);
        const double fy = k.y0() + k.drift() * tt;
        median.rows.push_back({tt, fit.median_y[t], fy, network::y_inverse(fit.median_y[t], total),
                               network::y_inverse(fy, total)});
    }
    io::write_numeric_table(dir / "median.csv", median);

    io::NumericTable density;
    density.header = {"t", "x", "y", "density"};
    constexpr int grid = 201;
    for (double t : c.density_times) {
        if (!(t > 0.0) || !(k.diffusion() > 0.0)) {
            continue;
        }
        const double mean = k.y0() + k.drift() * t;
        const double sd = std::sqrt(2.0 * k.diffusion() * t);
        for (int g = 0; g < grid; ++g) {
            const double y = mean + sd * (-6.0 + 12.0 * g / (grid - 1));
            const double x = network::y_inverse(y, total);
            if (x <= 0.0 || x >= total) {
                continue;
            }
            density.rows.push_back({t, x, y, network::kernel_density(k, x, t)});
        }
    }
    io::write_numeric_table(dir / "kernel_density.csv", density);

    report.insert(report.end(), {
                                    {"seed", std::to_string(c.seed)},
                                    {"processes", std::to_string(c.processes)},
                                    {"total", format_double(total)},
                                    {"usable_iterations", std::to_string(fit.usable_iterations)},
                                    {"y0", format_double(k.y0())},
                                    {"drift", format_double(k.drift())},
                                    {"diffusion", format_double(k.diffusion())},
                                    {"sigma", format_double(k.sigma())},
                                    {"diffusion_variance_growth", format_double(fit.variance_growth_diffusion)},
                                });
    write_report(dir / "kernel.csv", report);

    ordered_json cfg{{"nodes", c.nodes}, {"max_degree", c.max_degree}, {"seed", c.seed}, {"processes", c.processes}};
    cfg["edges"] = c.edges ? c.edges->string() : std::string();
    cfg["density_times"] = c.density_times;
    write_manifest(dir, "diffuse", cfg,
                   {"processes.csv", "degree_histogram.csv", "median.csv", "kernel_density.csv", "kernel.csv"});
    return report;
}

Report cmd_forecast(const ForecastConfig& c) {
    require_input(c.input, "share series");
    if (c.horizon < 0) {
        throw InputError("forecast: horizon must be non-negative");
    }
    const fs::path dir = resolve_output(c.output_dir);
    const auto series = io::read_share_series(c.input, c.epoch, c.total, c.row_tolerance, c.renormalize);
    const std::size_t ref = c.reference.empty() ? 0 : series.index_of(c.reference);
    const auto h = forecast::extract_h(series, ref, c.convention);
    const auto fit = forecast::fit_rates(h, c.form);

    std::vector<double> times = series.times();
    const double last = times.back();
    for (int m = 1; m <= c.horizon; ++m) {
        times.push_back(last + m);
    }
    const auto predicted = forecast::forecast(series, fit, times, c.n_prime_factor);
    io::write_share_series(dir / "forecast.csv", predicted, c.epoch);

    {
        std::vector<std::vector<double>> rows(h.times.size(), std::vector<double>(series.component_count()));
        for (std::size_t i = 0; i < series.component_count(); ++i) {
            for (std::size_t k = 0; k < h.times.size(); ++k) {
                rows[k][i] = h.h[i][k];
            }
        }
        io::NumericTable t;
        t.header = {"t"};
        t.header.insert(t.header.end(), series.components().begin(), series.components().end());
        for (std::size_t k = 0; k < h.times.size(); ++k) {
            t.rows.push_back({h.times[k]});
            t.rows.back().insert(t.rows.back().end(), rows[k].begin(), rows[k].end());
        }
        io::write_numeric_table(dir / "h.csv", t);
    }
    {
        auto out = io::open_output(dir / "fit.csv");
        io::CsvWriter w(out);
        w.row({"component", "form", "a", "a_err", "b", "b_err", "c", "c_err", "rss", "iterations"});
        for (std::size_t i = 0; i < series.component_count(); ++i) {
            const auto& f = fit.components[i];
            if (f.is_reference) {
                w.row({series.components()[i], "reference", "0", "0", "0", "0", "0", "0", "0", "0"});
                continue;
            }
            w.row({series.components()[i], forecast::to_string(f.form), format_double(f.a), format_double(f.a_err),
                   format_double(f.b), format_double(f.b_err), format_double(f.c), format_double(f.c_err),
                   format_double(f.rss), std::to_string(f.iterations)});
        }
    }

    double max_err = 0.0;
    for (std::size_t k = 0; k < series.sample_count(); ++k) {
        for (std::size_t i = 0; i < series.component_count(); ++i) {
            max_err = std::max(max_err, std::abs(predicted.shares()[k][i] - series.shares()[k][i]));
        }
    }
    const char* convention = c.convention == forecast::HConvention::growth ? "growth" : "printed";
    Report report{
        {"components", std::to_string(series.component_count())},
        {"samples", std::to_string(series.sample_count())},
        {"reference", series.components()[ref]},
        {"epoch", c.epoch},
        {"form", forecast::to_string(c.form)},
        {"convention", convention},
        {"n_prime_factor", format_double(c.n_prime_factor)},
        {"horizon_months", std::to_string(c.horizon)},
        {"training_max_abs_error", format_double(max_err)},
    };
    for (std::size_t i = 0; i < series.component_count(); ++i) {
        if (i == ref) {
            continue;
        }
        const auto& f = fit.components[i];
        const std::string& name = series.components()[i];
        if (c.form != forecast::FitForm::tabulated) {
            report.emplace_back(name + ".a", format_double(f.a));
            report.emplace_back(name + ".a_err", format_double(f.a_err));
            if (c.form == forecast::FitForm::exponential) {
                report.emplace_back(name + ".b", format_double(f.b));
                report.emplace_back(name + ".b_err", format_double(f.b_err));
            }
            report.emplace_back(name + ".c", format_double(f.c));
            report.emplace_back(name + ".c_err", format_double(f.c_err));
        }
        report.emplace_back(name + ".final_share", format_double(predicted.shares().back()[i]));
    }
    write_report(dir / "forecast_report.csv", report);
    write_manifest(dir, "forecast",
                   {{"input", c.input.string()},
                    {"epoch", c.epoch},
                    {"reference", series.components()[ref]},
                    {"form", forecast::to_string(c.form)},
                    {"convention", convention},
                    {"horizon", c.horizon},
                    {"n_prime_factor", c.n_prime_factor},
                    {"total", c.total},
                    {"row_tolerance", c.row_tolerance},
                    {"renormalize", c.renormalize}},
                   {"forecast.csv", "h.csv", "fit.csv", "forecast_report.csv"});
    return report;
}

Report cmd_itm(const ItmConfig& c) {
    require_input(c.matrix, "rate matrix");
    if (c.every < 1) {
        throw InputError("itm: output stride must be at least 1");
    }
    if (!(c.total > 0.0)) {
        throw InputError("itm: total must be positive");
    }
    const fs::path dir = resolve_output(c.output_dir);
    const auto raw = io::read_matrix(c.matrix);
    if (raw.rows() != raw.cols()) {
        throw InputError(fmt::format("itm: matrix is {}x{}, expected square", raw.rows(), raw.cols()));
    }
    const itm::RateMatrix k(raw);
    const auto n = k.size();

    Eigen::VectorXd init;
    if (c.initial.empty()) {
        init = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    } else {
        if (static_cast<Eigen::Index>(c.initial.size()) != n) {
            throw InputError(fmt::format("itm: initial state has {} entries, matrix is {}x{}", c.initial.size(), n, n));
        }
        if (c.initial_is_populations) {
            init = itm::to_chi(PopulationState(c.initial, c.total, 0.0, 1e-6)).chi();
        } else {
            init = Eigen::Map<const Eigen::VectorXd>(c.initial.data(), n);
            for (double v : c.initial) {
                if (!(v >= 0.0)) {
                    throw InputError("itm: amplitudes must be non-negative");
                }
            }
            init /= init.norm();
        }
    }
    const itm::ChiState chi0(init);
    const auto traj = itm::itm_evolve(chi0, k, c.t_end, c.dt);

    double max_norm_err = 0.0;
    bool monotone = true;
    double prev_q = itm::rayleigh_quotient(traj.front().chi(), k);
    for (const auto& s : traj) {
        max_norm_err = std::max(max_norm_err, std::abs(s.chi().norm() - 1.0));
        const double q = itm::rayleigh_quotient(s.chi(), k);
        if (q < prev_q - 1e-12 * std::max(1.0, std::abs(prev_q))) {
            monotone = false;
        }
        prev_q = q;
    }

    io::NumericTable table;
    table.header = {"t"};
    for (Eigen::Index i = 0; i < n; ++i) {
        table.header.push_back(fmt::format("chi_{}", i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        table.header.push_back(fmt::format("x_{}", i));
    }
    table.header.push_back("rayleigh");
    for (std::size_t s = 0; s < traj.size(); ++s) {
        if (s % c.every != 0 && s + 1 != traj.size()) {
            continue;
        }
        std::vector<double> row{traj[s].time()};
        for (Eigen::Index i = 0; i < n; ++i) {
            row.push_back(traj[s][i]);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            row.push_back(c.total * traj[s][i] * traj[s][i]);
        }
        row.push_back(itm::rayleigh_quotient(traj[s].chi(), k));
        table.rows.push_back(std::move(row));
    }
    io::write_numeric_table(dir / "trajectory.csv", table);

    Report report{
        {"size", std::to_string(n)},
        {"t_end", format_double(c.t_end)},
        {"dt", format_double(c.dt)},
        {"steps", std::to_string(traj.size() - 1)},
        {"max_norm_error", format_double(max_norm_err)},
        {"rayleigh_monotone", monotone ? "PASS" : "FAIL"},
        {"final_rayleigh", format_double(prev_q)},
    };
    if (k.is_diagonal()) {
        const auto diag = k.diagonal_values();
        std::vector<double> x0(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            x0[static_cast<std::size_t>(i)] = std::max(chi0[i] * chi0[i], std::numeric_limits<double>::min());
        }
        double worst = 0.0;
        for (const auto& s : traj) {
            const auto ref = closed_form(x0, diag, 1.0, s.time());
            for (Eigen::Index i = 0; i < n; ++i) {
                const double r = ref.values()[static_cast<std::size_t>(i)];
                if (r > 1e-300) {
                    worst = std::max(worst, std::abs(s[i] * s[i] - r) / r);
                }
            }
        }
        report.emplace_back("equivalence_max_rel_error", format_double(worst));
        report.emplace_back("equivalence_check", worst < 1e-6 ? "PASS" : "FAIL");
    } else {
        report.emplace_back("equivalence_check", "not_applicable");
    }
    write_report(dir / "itm_report.csv", report);
    write_manifest(dir, "itm",
                   {{"matrix", c.matrix.string()},
                    {"initial", c.initial},
                    {"initial_is_populations", c.initial_is_populations},
                    {"total", c.total},
                    {"t_end", c.t_end},
                    {"dt", c.dt},
                    {"every", c.every}},
                   {"trajectory.csv", "itm_report.csv"});
    return report;
}

} // namespace mcle::cli
