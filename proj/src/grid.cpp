#include "stationary/grid.hpp"

#include "stationary/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace stationary {

Partition build_partition(double k_minus, double k_plus, double delta) {
    if (!std::isfinite(k_minus) || !std::isfinite(k_plus) || !(k_minus < k_plus))
        throw InvalidInterval(fmt::format("invalid interval [{}, {})", k_minus, k_plus));
    if (!(delta > 0.0) || !std::isfinite(delta)) throw NonIntegralMesh("mesh must be positive");
    const double ratio = (k_plus - k_minus) / delta;
    const double cells = std::round(ratio);
    if (cells < 1.0 || std::abs(ratio - cells) > 1e-9 * std::max(1.0, ratio))
        throw NonIntegralMesh(fmt::format("({} - {}) / {} = {} is not an integer", k_plus, k_minus, delta, ratio));
    const auto q = static_cast<std::size_t>(cells);
    const double snapped = (k_plus - k_minus) / cells;
    std::vector<double> points(q + 1);
    for (std::size_t i = 0; i < q; ++i) points[i] = k_minus + static_cast<double>(i) * snapped;
    points[q] = k_plus;
    return Partition(k_minus, k_plus, snapped, std::move(points));
}

std::optional<std::size_t> locate_cell(const Partition& p, double x) {
    if (!(x >= p.k_minus() && x < p.k_plus())) return std::nullopt;
    const std::size_t q = p.q_max();
    const double r = std::floor((x - p.k_minus()) / p.delta());
    std::size_t i = r <= 0.0 ? 0 : std::min(static_cast<std::size_t>(r), q - 1);
    while (i > 0 && x < p.point(i)) --i;
    while (i + 1 < q && x >= p.point(i + 1)) ++i;
    return i;
}

}  // namespace stationary
