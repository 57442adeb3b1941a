#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stationary {

/// Per-cell quadrature rule. Nodes and weights live on the unit interval
/// [0,1]; weights sum to 1 and are scaled by the cell length when applied.
class QuadratureRule {
public:
    enum class Kind { GaussLegendre, Midpoint };

    static QuadratureRule gauss_legendre(int nodes);
    static QuadratureRule midpoint();
    /// Parses "gauss5", "gauss3", "gaussN" or "midpoint".
    static QuadratureRule parse(std::string_view name);

    Kind kind() const noexcept { return kind_; }
    int size() const noexcept { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::string name() const;

    template <class F>
    double integrate(F&& f, double a, double b) const {
        const double len = b - a;
        double acc = 0.0;
        for (std::size_t n = 0; n < nodes_.size(); ++n) acc += weights_[n] * f(a + len * nodes_[n]);
        return acc * len;
    }

    bool operator==(const QuadratureRule& other) const = default;

private:
    QuadratureRule(Kind kind, std::vector<double> nodes, std::vector<double> weights)
        : kind_(kind), nodes_(std::move(nodes)), weights_(std::move(weights)) {}

    Kind kind_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

}  // namespace stationary
