#pragma once

#include "stationary/discretize.hpp"
#include "stationary/invariant.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace stationary {

/// Approximate stationary law: density part p_k(y) = 1_{[k-,k+)}(y) *
/// sum_i pi_i inf_{t in cell i} p(t, y) plus an atom of weight dirac_weight at x0.
class ApproxDensity {
public:
    const Partition& partition() const noexcept { return partition_; }
    /// pi_i for the q_max cells (escape coordinate dropped).
    const std::vector<double>& weights() const noexcept { return weights_; }
    const KernelModel& model() const noexcept { return model_; }
    const InfStrategy& strategy() const noexcept { return strategy_; }
    const QuadratureRule& quadrature() const noexcept { return quadrature_; }
    double dirac_weight() const noexcept { return dirac_weight_; }
    double x0() const noexcept { return x0_; }

    double operator()(double y) const;
    /// Bulk evaluation; amortizes kernel calls across cells.
    std::vector<double> evaluate(std::span<const double> ys, unsigned threads = 0) const;
    /// p_k at the left endpoints x_0 .. x_{q_max-1}.
    std::vector<double> grid_values(unsigned threads = 0) const;

private:
    friend ApproxDensity build_density(const DiscretizedChain&, const InvariantVector&);
    ApproxDensity(Partition partition, std::vector<double> weights, KernelModel model, InfStrategy strategy,
                  QuadratureRule quadrature, double dirac_weight, double x0)
        : partition_(std::move(partition)), weights_(std::move(weights)), model_(std::move(model)),
          strategy_(strategy), quadrature_(std::move(quadrature)), dirac_weight_(dirac_weight), x0_(x0) {}

    Partition partition_;
    std::vector<double> weights_;
    KernelModel model_;
    InfStrategy strategy_;
    QuadratureRule quadrature_;
    double dirac_weight_;
    double x0_;
};

/// dirac_weight = 1 - sum_i pi_i T_i from the assembly row totals, clamped to [0, 1].
ApproxDensity build_density(const DiscretizedChain& chain, const InvariantVector& pi);

inline double density_eval(const ApproxDensity& pk, double y) { return pk(y); }

/// Integral of f against the approximate measure: sum_i pi_i times the
/// integral of f * (cell i infimum), with the assembly cell rule unless `quad`
/// is given, plus f(x0) * dirac_weight.
double measure_integrate(const ApproxDensity& pk, const std::function<double(double)>& f,
                         const std::optional<QuadratureRule>& quad = std::nullopt, unsigned threads = 0);

/// Header `x,p_k[,p_exact,diff]`, one row per left endpoint, then
/// `# dirac_weight=<w>, x0=<x0>`.
void write_density_csv(const ApproxDensity& pk, std::ostream& out,
                       const std::function<double(double)>* exact = nullptr, unsigned threads = 0);

}  // namespace stationary
