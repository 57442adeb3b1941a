#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace stationary {

/// Uniform partition of [k_minus, k_plus) into q_max half-open cells
/// [x_i, x_{i+1}) of width delta.
class Partition {
public:
    double k_minus() const noexcept { return k_minus_; }
    double k_plus() const noexcept { return k_plus_; }
    double delta() const noexcept { return delta_; }
    std::size_t q_max() const noexcept { return points_.size() - 1; }
    /// q_max + 1 points; the last one equals k_plus exactly.
    const std::vector<double>& points() const noexcept { return points_; }
    double point(std::size_t i) const noexcept { return points_[i]; }
    double cell_lo(std::size_t i) const noexcept { return points_[i]; }
    double cell_hi(std::size_t i) const noexcept { return points_[i + 1]; }

    bool operator==(const Partition&) const = default;

private:
    friend Partition build_partition(double, double, double);
    Partition(double lo, double hi, double delta, std::vector<double> points)
        : k_minus_(lo), k_plus_(hi), delta_(delta), points_(std::move(points)) {}

    double k_minus_;
    double k_plus_;
    double delta_;
    std::vector<double> points_;
};

/// Throws InvalidInterval unless k_minus < k_plus and NonIntegralMesh unless
/// (k_plus - k_minus) / delta is an integer to 1e-9 relative accuracy.
Partition build_partition(double k_minus, double k_plus, double delta);

/// Index i with x in [x_i, x_{i+1}); empty outside [k_minus, k_plus).
std::optional<std::size_t> locate_cell(const Partition& p, double x);

}  // namespace stationary
