#include "mcle/network.hpp"

#include "mcle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <unordered_map>

namespace mcle::network {

namespace {

std::uint64_t edge_key(NodeId a, NodeId b) {
    if (a > b) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

double median_of(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

} // namespace

Network::Network(std::size_t node_count, std::span<const Edge> edges, std::size_t max_degree, std::uint64_t seed)
    : adjacency_(node_count), edge_count_(edges.size()), max_degree_(max_degree), seed_(seed) {
    if (node_count == 0) {
        throw InputError("network needs at least one node");
    }
    if (node_count > std::numeric_limits<NodeId>::max()) {
        throw InputError("network too large for 32-bit node ids");
    }
    for (const auto& [a, b] : edges) {
        if (a >= node_count || b >= node_count) {
            throw InputError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") references a missing node");
        }
        if (a == b) {
            throw InputError("self-loop at node " + std::to_string(a));
        }
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    std::size_t observed_max = 0;
    for (std::size_t v = 0; v < node_count; ++v) {
        auto& nb = adjacency_[v];
        std::sort(nb.begin(), nb.end());
        if (std::adjacent_find(nb.begin(), nb.end()) != nb.end()) {
            throw InputError("repeated edge at node " + std::to_string(v));
        }
        observed_max = std::max(observed_max, nb.size());
    }
    if (max_degree_ == 0) {
        max_degree_ = observed_max;
    } else if (observed_max > max_degree_) {
        throw InputError("a node exceeds the declared maximum degree");
    }
}

std::vector<Edge> Network::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (std::size_t v = 0; v < adjacency_.size(); ++v) {
        for (NodeId w : adjacency_[v]) {
            if (v < w) {
                out.emplace_back(static_cast<NodeId>(v), w);
            }
        }
    }
    return out;
}

Network generate_sfin(std::size_t node_count, std::size_t max_degree, std::uint64_t seed, std::size_t min_degree) {
    if (max_degree < 2 || node_count < max_degree) {
        throw InputError("generate_sfin: need node_count >= max_degree >= 2");
    }
    if (min_degree < 1 || min_degree > max_degree) {
        throw InputError("generate_sfin: min_degree must lie in [1, max_degree]");
    }
    std::mt19937_64 rng(seed);

    std::vector<double> weights;
    for (std::size_t c = min_degree; c <= max_degree; ++c) {
        weights.push_back(1.0 / static_cast<double>(c));
    }
    std::discrete_distribution<std::size_t> pick_degree(weights.begin(), weights.end());
    std::vector<std::size_t> degree(node_count);
    std::size_t stub_total = 0;
    for (auto& d : degree) {
        d = min_degree + pick_degree(rng);
        stub_total += d;
    }
    if (stub_total % 2 == 1) {
        std::uniform_int_distribution<std::size_t> any_node(0, node_count - 1);
        for (int attempt = 0;; ++attempt) {
            auto& d = degree[any_node(rng)];
            if (d < max_degree) {
                ++d;
                break;
            }
            if (d > min_degree) {
                --d;
                break;
            }
            if (attempt > 1000) {
                throw NumericalError("generate_sfin: cannot make the degree sum even within [min, max]");
            }
        }
    }

    std::vector<NodeId> stubs;
    for (std::size_t v = 0; v < node_count; ++v) {
        stubs.insert(stubs.end(), degree[v], static_cast<NodeId>(v));
    }
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::vector<Edge> edges(stubs.size() / 2);
    std::unordered_map<std::uint64_t, int> multiplicity;
    multiplicity.reserve(edges.size() * 2);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        edges[e] = {stubs[2 * e], stubs[2 * e + 1]};
        ++multiplicity[edge_key(edges[e].first, edges[e].second)];
    }

    auto is_bad = [&](const Edge& e) {
        return e.first == e.second || multiplicity[edge_key(e.first, e.second)] > 1;
    };
    std::vector<std::size_t> bad;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (is_bad(edges[e])) {
            bad.push_back(e);
        }
    }

    // Degree-preserving swaps: (u,v),(a,b) -> (u,a),(v,b) or (u,b),(v,a).
    const std::size_t attempt_cap = 100 * std::max<std::size_t>(edges.size(), 1);
    std::size_t attempts = 0;
    std::uniform_int_distribution<std::size_t> any_edge(0, edges.empty() ? 0 : edges.size() - 1);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t bi : bad) {
        if (!is_bad(edges[bi])) {
            continue;
        }
        for (;;) {
            if (++attempts > attempt_cap) {
                throw NumericalError("generate_sfin: degree sequence not realizable as a simple graph after " +
                                     std::to_string(attempt_cap) + " swap attempts");
            }
            const std::size_t j = any_edge(rng);
            if (j == bi || is_bad(edges[j])) {
                continue;
            }
            auto [u, v] = edges[bi];
            auto [a, b] = edges[j];
            if (coin(rng)) {
                std::swap(a, b);
            }
            if (u == a || v == b) {
                continue;
            }
            const auto k1 = edge_key(u, a);
            const auto k2 = edge_key(v, b);
            if (k1 == k2 || multiplicity[k1] > 0 || multiplicity[k2] > 0) {
                continue;
            }
            --multiplicity[edge_key(u, v)];
            --multiplicity[edge_key(a, b)];
            ++multiplicity[k1];
            ++multiplicity[k2];
            edges[bi] = {u, a};
            edges[j] = {v, b};
            break;
        }
    }
    return Network(node_count, edges, max_degree, seed);
}

std::vector<std::size_t> degree_histogram(const Network& net) {
    std::vector<std::size_t> counts(net.max_degree() + 1, 0);
    for (std::size_t v = 0; v < net.node_count(); ++v) {
        ++counts[net.degree(static_cast<NodeId>(v))];
    }
    return counts;
}

double loglog_slope(std::span<const std::size_t> histogram, std::size_t lo, std::size_t hi) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t c = std::max<std::size_t>(lo, 1); c <= hi && c < histogram.size(); ++c) {
        if (histogram[c] == 0) {
            continue;
        }
        const double x = std::log(static_cast<double>(c));
        const double y = std::log(static_cast<double>(histogram[c]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) {
        throw NumericalError("loglog_slope: fewer than two nonzero bins");
    }
    const double k = static_cast<double>(m);
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

namespace {

std::vector<std::vector<NodeId>> components(const Network& net) {
    std::vector<std::vector<NodeId>> out;
    std::vector<bool> seen(net.node_count(), false);
    std::vector<NodeId> queue;
    for (std::size_t s = 0; s < net.node_count(); ++s) {
        if (seen[s]) {
            continue;
        }
        queue.assign(1, static_cast<NodeId>(s));
        seen[s] = true;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (NodeId w : net.neighbors(queue[head])) {
                if (!seen[w]) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        out.push_back(queue);
    }
    return out;
}

} // namespace

std::vector<std::size_t> component_sizes(const Network& net) {
    std::vector<std::size_t> sizes;
    for (const auto& c : components(net)) {
        sizes.push_back(c.size());
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    return sizes;
}

std::vector<NodeId> largest_component(const Network& net) {
    auto all = components(net);
    auto it = std::max_element(all.begin(), all.end(),
                               [](const auto& a, const auto& b) { return a.size() < b.size(); });
    std::vector<NodeId> nodes = std::move(*it);
    std::sort(nodes.begin(), nodes.end());
    return nodes;
}

GrowthProcess grow_cluster(const Network& net, NodeId seed_node) {
    if (seed_node >= net.node_count()) {
        throw InputError("grow_cluster: seed node out of range");
    }
    GrowthProcess process;
    process.seed_node = seed_node;
    std::vector<bool> in_cluster(net.node_count(), false);
    std::vector<NodeId> frontier{seed_node};
    std::vector<NodeId> next;
    in_cluster[seed_node] = true;
    std::size_t size = 1;
    process.sizes.push_back(size);
    while (!frontier.empty()) {
        next.clear();
        for (NodeId v : frontier) {
            for (NodeId w : net.neighbors(v)) {
                if (!in_cluster[w]) {
                    in_cluster[w] = true;
                    next.push_back(w);
                }
            }
        }
        if (next.empty()) {
            break;
        }
        size += next.size();
        process.sizes.push_back(size);
        frontier.swap(next);
    }
    return process;
}

double y_transform(double x, double total) {
    if (!(x > 0.0 && x < total)) {
        throw InputError("y_transform: x must lie strictly between 0 and N");
    }
    return std::log(x / (total - x));
}

double y_inverse(double y, double total) { return total / (1.0 + std::exp(-y)); }

DiffusionKernelParams::DiffusionKernelParams(double drift, double diffusion, double y0, double total, double dt)
    : drift_(drift), diffusion_(diffusion), y0_(y0), total_(total), dt_(dt) {
    if (!(diffusion > 0.0) || !std::isfinite(diffusion)) {
        throw InputError("diffusion coefficient must be positive and finite");
    }
    if (!(total > 0.0) || !(dt > 0.0)) {
        throw InputError("kernel total and dt must be positive");
    }
    if (!std::isfinite(drift) || !std::isfinite(y0)) {
        throw InputError("kernel drift and y0 must be finite");
    }
    sigma_ = std::sqrt(2.0 * diffusion / dt);
}

double kernel_density(const DiffusionKernelParams& p, double x, double t) {
    if (!(x > 0.0 && x < p.total())) {
        throw InputError("kernel_density: x must lie strictly between 0 and N");
    }
    if (!(t > 0.0)) {
        throw InputError("kernel_density: t must be positive");
    }
    const double y = y_transform(x, p.total());
    const double spread = 4.0 * p.diffusion() * t;
    const double d = y - p.y0() - p.drift() * t;
    return std::exp(-d * d / spread) / (std::sqrt(std::numbers::pi * spread) * x * (1.0 - x / p.total()));
}

double kernel_median(const DiffusionKernelParams& p, double t) { return y_inverse(p.y0() + p.drift() * t, p.total()); }

KernelFit fit_kernel(std::span<const std::vector<double>> trajectories, double total) {
    const std::size_t count = trajectories.size();
    if (count < 30) {
        throw InputError("fit_kernel: need at least 30 processes, got " + std::to_string(count));
    }
    if (!(total > 0.0)) {
        throw InputError("fit_kernel: total must be positive");
    }
    std::size_t horizon = 0;
    for (const auto& tr : trajectories) {
        if (tr.empty()) {
            throw InputError("fit_kernel: empty trajectory");
        }
        horizon = std::max(horizon, tr.size());
    }
    // y of process p at iteration t; terminated processes keep their final
    // size; saturated points (x >= N) map to +inf and are excluded from fits.
    constexpr double inf = std::numeric_limits<double>::infinity();
    auto y_at = [&](std::size_t p, std::size_t t) {
        const auto& tr = trajectories[p];
        const double x = tr[std::min(t, tr.size() - 1)];
        if (x >= total) {
            return inf;
        }
        if (!(x > 0.0)) {
            throw InputError("fit_kernel: non-positive cluster size");
        }
        return y_transform(x, total);
    };

    KernelFit fit{DiffusionKernelParams(0.0, 1.0, 0.0, total), {}, 0.0, 0};
    std::vector<double> column(count);
    std::vector<std::vector<double>> y_table;
    for (std::size_t t = 0; t < horizon; ++t) {
        std::size_t finite = 0;
        for (std::size_t p = 0; p < count; ++p) {
            column[p] = y_at(p, t);
            finite += std::isfinite(column[p]) ? 1 : 0;
        }
        if (2 * finite <= count) {
            break;
        }
        fit.median_y.push_back(median_of(column));
        y_table.push_back(column);
    }
    fit.usable_iterations = fit.median_y.size();
    if (fit.usable_iterations < 3) {
        throw InputError("fit_kernel: too few usable interior points (" + std::to_string(fit.usable_iterations) +
                         " iterations before half the processes saturate)");
    }

    const double y0 = fit.median_y.front();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 1; t < fit.usable_iterations; ++t) {
        const auto tt = static_cast<double>(t);
        num += tt * (fit.median_y[t] - y0);
        den += tt * tt;
    }
    const double drift = num / den;

    // Pooled variance of the per-iteration increments.
    double pooled_ss = 0.0;
    double pooled_dof = 0.0;
    for (std::size_t t = 0; t + 1 < fit.usable_iterations; ++t) {
        double mean = 0.0;
        double m2 = 0.0;
        std::size_t m = 0;
        for (std::size_t p = 0; p < count; ++p) {
            const double a = y_table[t][p];
            const double b = y_table[t + 1][p];
            if (!std::isfinite(a) || !std::isfinite(b)) {
                continue;
            }
            ++m;
            const double d = b - a;
            const double delta = d - mean;
            mean += delta / static_cast<double>(m);
            m2 += delta * (d - mean);
        }
        if (m >= 2) {
            pooled_ss += m2;
            pooled_dof += static_cast<double>(m - 1);
        }
    }
    if (pooled_dof < 1.0) {
        throw InputError("fit_kernel: too few usable interior points for the increment variance");
    }
    const double step_variance = pooled_ss / pooled_dof;
    if (!(step_variance > 0.0)) {
        throw NumericalError("fit_kernel: increments have zero variance, D is undefined");
    }

    double vnum = 0.0;
    double vden = 0.0;
    for (std::size_t t = 1; t < fit.usable_iterations; ++t) {
        double mean = 0.0;
        double m2 = 0.0;
        std::size_t m = 0;
        for (double v : y_table[t]) {
            if (!std::isfinite(v)) {
                continue;
            }
            ++m;
            const double delta = v - mean;
            mean += delta / static_cast<double>(m);
            m2 += delta * (v - mean);
        }
        if (m >= 2) {
            const auto tt = static_cast<double>(t);
            vnum += tt * m2 / static_cast<double>(m - 1);
            vden += tt * tt;
        }
    }

    fit.params = DiffusionKernelParams(drift, 0.5 * step_variance, y0, total, 1.0);
    fit.variance_growth_diffusion = vden > 0.0 ? 0.5 * vnum / vden : 0.0;
    return fit;
}

KernelFit fit_kernel(std::span<const GrowthProcess> processes, double total) {
    std::vector<std::vector<double>> trajectories;
    trajectories.reserve(processes.size());
    for (const auto& p : processes) {
        trajectories.emplace_back(p.sizes.begin(), p.sizes.end());
    }
    return fit_kernel(std::span<const std::vector<double>>(trajectories), total);
}

} // namespace mcle::network
