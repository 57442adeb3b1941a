#pragma once

#include "stationary/density.hpp"
#include "stationary/pipeline.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace stationary {

using DensityFn = std::function<double(double)>;

/// Closed-form stationary density of the Gaussian AR(1): N(0, sigma^2 / (1 - rho^2)).
DensityFn gaussian_ar1_density(double rho, double sigma = 1.0);

struct ErrorReport {
    /// max_i |p_k(x_i) - p(x_i)| over the left endpoints.
    std::optional<double> sup_error;
    /// delta * sum_i |p_k(x_i) - p(x_i)|.
    std::optional<double> l1_riemann;
    double dirac_weight = 0.0;
    /// max_i |p_k(x_i) - delta * sum_j p_k(x_j) p(x_j, x_i)|.
    std::optional<double> invariance_residual;
    nlohmann::json config;
    double runtime_seconds = 0.0;
};

struct GridErrors {
    double sup;
    double l1_riemann;
};

GridErrors grid_errors(const ApproxDensity& pk, std::span<const double> grid_values, const DensityFn& exact);
double sup_error(const ApproxDensity& pk, const DensityFn& exact, unsigned threads = 0);
double riemann_l1_error(const ApproxDensity& pk, const DensityFn& exact, unsigned threads = 0);

/// One-step Riemann image of p_k under the true kernel, compared on the grid.
double invariance_residual(const ApproxDensity& pk, std::span<const double> grid_values, unsigned threads = 0);
double invariance_residual(const ApproxDensity& pk, unsigned threads = 0);

/// Echo of the resolved configuration of a pipeline run.
nlohmann::json describe_run(const DiscretizedChain& chain, const SolveOptions& solve);

ErrorReport make_error_report(const PipelineResult& run, const SolveOptions& solve, const DensityFn* exact,
                              bool with_invariance, unsigned threads = 0);

nlohmann::json to_json(const ErrorReport& report);

/// Least-squares slope of log(y) against log(x); empty with fewer than two
/// usable (positive) points.
std::optional<double> log_log_slope(std::span<const double> x, std::span<const double> y);

struct RateStudy {
    std::vector<double> deltas;
    std::vector<ErrorReport> rows;
    /// Fitted on sup_error when an exact density is given, else on invariance_residual.
    std::optional<double> slope;
    /// Fitted on l1_riemann (exact density only).
    std::optional<double> slope_l1;
    /// One message per mesh whose pipeline failed; the other rows are kept.
    std::vector<std::string> failures;
};

RateStudy rate_study(const KernelModel& model, double k_minus, double k_plus, std::span<const double> deltas,
                     const std::optional<DensityFn>& exact, const PipelineOptions& options = {});

struct AssumptionReport {
    double alpha_k = 0.0;
    double drift_delta_hat = 1.0;
    double drift_M_hat = 0.0;
    bool drift_verified = false;
    double lipschitz_budget = 0.0;
    double tau_k = 0.0;
    std::optional<double> arch_logmoment;
};

/// Numerical stand-ins for the drift, tail and Lipschitz conditions on the
/// truncated support. Never throws on a failed condition; it reports.
AssumptionReport assumption_diagnostics(const KernelModel& model, const Partition& p, std::int64_t mc_samples,
                                        std::uint64_t seed = 1, const QuadratureRule& quad = QuadratureRule::gauss_legendre(5),
                                        unsigned threads = 0);

nlohmann::json to_json(const AssumptionReport& report);

/// Draws from the closed-form innovations. Throws UnsamplableInnovation for
/// tabulated and custom densities.
class InnovationSampler {
public:
    explicit InnovationSampler(const InnovationDensity& innovation);
    double operator()(std::mt19937_64& rng);

private:
    InnovationDensity::Kind kind_;
    std::normal_distribution<double> normal_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

/// h_0 = nu, h_n(x) = int nu(x - rho u) h_{n-1}(u) du on the grid points by
/// the trapezoid rule, renormalized after every step.
TabulatedDensity hn_baseline(const InnovationDensity& innovation, double rho, int n_iters, const Partition& grid);

/// Simulates the chain from X_0 = 0, drops the first 1% as burn-in and bins
/// the rest on the partition cells. Values are densities at the cell
/// midpoints, normalized by the number of retained draws.
TabulatedDensity mcmc_histogram(const KernelModel& model, std::int64_t n_samples, const Partition& p,
                                std::uint64_t seed);

/// delta * sum_j |h_j - f(m_j)| over the histogram midpoints m_j.
double histogram_l1(const TabulatedDensity& histogram, double delta, const DensityFn& f);

}  // namespace stationary
