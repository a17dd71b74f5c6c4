#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace mcle::network {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Simple undirected graph stored as sorted neighbor lists.
class Network {
public:
    /// Throws InputError on self-loops, repeated edges or out-of-range nodes.
    Network(std::size_t node_count, std::span<const Edge> edges, std::size_t max_degree = 0,
            std::uint64_t seed = 0);

    std::size_t node_count() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }
    std::span<const NodeId> neighbors(NodeId v) const { return adjacency_.at(v); }
    std::size_t degree(NodeId v) const { return adjacency_.at(v).size(); }
    std::size_t max_degree() const noexcept { return max_degree_; }
    std::uint64_t seed() const noexcept { return seed_; }
    /// Edges with u < v, sorted.
    std::vector<Edge> edges() const;

private:
    std::vector<std::vector<NodeId>> adjacency_;
    std::size_t edge_count_ = 0;
    std::size_t max_degree_ = 0;
    std::uint64_t seed_ = 0;
};

/// Scale-free ideal network: degrees drawn from p(c) ∝ 1/c on
/// [min_degree, max_degree], wired by the configuration model, with self-loops
/// and repeated edges removed by degree-preserving edge swaps.
Network generate_sfin(std::size_t node_count, std::size_t max_degree, std::uint64_t seed,
                      std::size_t min_degree = 1);

/// counts[c] = number of nodes with degree c.
std::vector<std::size_t> degree_histogram(const Network& net);

/// Least-squares slope of log(count) against log(c) over nonzero bins in [lo, hi].
double loglog_slope(std::span<const std::size_t> histogram, std::size_t lo, std::size_t hi);

/// Sizes of connected components, largest first.
std::vector<std::size_t> component_sizes(const Network& net);
/// Nodes of the largest connected component, ascending.
std::vector<NodeId> largest_component(const Network& net);

/// Cluster size after each breadth-first layer, starting from one seed node.
struct GrowthProcess {
    NodeId seed_node = 0;
    std::vector<std::size_t> sizes;
};

GrowthProcess grow_cluster(const Network& net, NodeId seed_node);

/// y = -log(N/x - 1) for 0 < x < N, and its inverse.
double y_transform(double x, double total);
double y_inverse(double y, double total);

/// Drift-diffusion kernel in y-space: y(t) ~ Normal(y0 + k̄ t, 2 D t).
class DiffusionKernelParams {
public:
    DiffusionKernelParams(double drift, double diffusion, double y0, double total, double dt = 1.0);

    double drift() const noexcept { return drift_; }
    double diffusion() const noexcept { return diffusion_; }
    double y0() const noexcept { return y0_; }
    double total() const noexcept { return total_; }
    double dt() const noexcept { return dt_; }
    /// sqrt(2 D / dt).
    double sigma() const noexcept { return sigma_; }

private:
    double drift_;
    double diffusion_;
    double y0_;
    double total_;
    double dt_;
    double sigma_;
};

/// p_X(x,t) = exp[-(y - y0 - k̄t)^2 / (4Dt)] / (sqrt(4πDt) x (1 - x/N)), y = y(x).
double kernel_density(const DiffusionKernelParams& params, double x, double t);

/// Median of p_X at time t: N / (1 + e^{-(y0 + k̄t)}).
double kernel_median(const DiffusionKernelParams& params, double t);

struct KernelFit {
    DiffusionKernelParams params;
    /// Median of y over processes at each usable iteration 0..T.
    std::vector<double> median_y;
    /// D from var(y) ≈ 2Dt, kept for comparison with the increment estimate.
    double variance_growth_diffusion = 0.0;
    std::size_t usable_iterations = 0;
};

/// Fits k̄ as the least-squares slope of the median y-trajectory through y0 and
/// D from the pooled variance of per-iteration increments of y (Δt = 1).
/// Points with x >= N are excluded. Needs at least 30 trajectories.
KernelFit fit_kernel(std::span<const std::vector<double>> trajectories, double total);
KernelFit fit_kernel(std::span<const GrowthProcess> processes, double total);

} // namespace mcle::network
