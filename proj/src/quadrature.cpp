#include "stationary/quadrature.hpp"

#include "stationary/errors.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace stationary {

QuadratureRule QuadratureRule::gauss_legendre(int n) {
    if (n < 2 || n > 64) throw ValidationError("Gauss-Legendre node count must be in [2, 64]");
    std::vector<double> nodes(n), weights(n);
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]; ascending order
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = weights[n - 1 - i] = 0.5 * w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.5;
    return QuadratureRule(Kind::GaussLegendre, std::move(nodes), std::move(weights));
}

QuadratureRule QuadratureRule::midpoint() { return QuadratureRule(Kind::Midpoint, {0.5}, {1.0}); }

QuadratureRule QuadratureRule::parse(std::string_view name) {
    if (name == "midpoint") return midpoint();
    if (name.starts_with("gauss")) {
        const auto digits = name.substr(5);
        int n = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
        if (ec == std::errc() && ptr == digits.data() + digits.size()) return gauss_legendre(n);
    }
    throw ValidationError("unknown quadrature '" + std::string(name) + "'");
}

std::string QuadratureRule::name() const {
    if (kind_ == Kind::Midpoint) return "midpoint";
    return "gauss" + std::to_string(nodes_.size());
}

}  // namespace stationary
