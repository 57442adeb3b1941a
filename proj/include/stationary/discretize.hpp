#pragma once

#include "stationary/grid.hpp"
#include "stationary/kernel.hpp"
#include "stationary/quadrature.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stationary {

/// Square nonnegative matrix stored densely (row-major) or as compressed
/// sparse rows.
class StochasticMatrix {
public:
    enum class Storage { Dense, Sparse };

    static StochasticMatrix dense(std::size_t n, std::vector<double> row_major);
    static StochasticMatrix from_rows(const std::vector<std::vector<double>>& rows);
    static StochasticMatrix sparse(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::uint32_t> cols,
                                   std::vector<double> values);

    std::size_t size() const noexcept { return n_; }
    Storage storage() const noexcept { return storage_; }
    std::size_t nonzeros() const noexcept;

    double operator()(std::size_t i, std::size_t j) const;
    double row_sum(std::size_t i) const;

    /// f(j, value) over the stored entries of row i, in column order.
    template <class F>
    void for_each_in_row(std::size_t i, F&& f) const {
        if (storage_ == Storage::Dense) {
            const double* row = dense_.data() + i * n_;
            for (std::size_t j = 0; j < n_; ++j) f(j, row[j]);
        } else {
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) f(static_cast<std::size_t>(cols_[k]), values_[k]);
        }
    }

    /// out = v * B. Rows are split into fixed chunks per thread and the chunk
    /// partials are summed in chunk order, so results are reproducible at a
    /// fixed thread count.
    void left_multiply(std::span<const double> v, std::span<double> out, unsigned threads = 1) const;

    std::vector<double> to_dense() const;

private:
    StochasticMatrix() = default;

    Storage storage_ = Storage::Dense;
    std::size_t n_ = 0;
    std::vector<double> dense_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> cols_;
    std::vector<double> values_;
};

/// The (q_max+1) x (q_max+1) matrix B_k. Row i < q_max is the source cell
/// [x_i, x_{i+1}); index q_max is the escape coordinate for the complement
/// of the truncated support.
struct DiscretizedChain {
    StochasticMatrix matrix;
    /// T_i = sum_j of the per-cell integrals of row i (mass kept inside the support).
    std::vector<double> row_totals;
    Partition partition;
    std::size_t j0;
    double x0;
    KernelModel model;
    QuadratureRule quadrature;
    InfStrategy strategy;
    double drop_tol;
    /// Non-fatal conditions met during assembly (negative defects).
    std::vector<std::string> warnings;

    std::size_t q_max() const noexcept { return partition.q_max(); }
};

struct AssemblyOptions {
    enum class StorageChoice { Auto, Dense, Sparse };

    QuadratureRule quadrature = QuadratureRule::gauss_legendre(5);
    /// Defaults to the model's preferred strategy.
    std::optional<InfStrategy> strategy;
    /// Defaults to the cell containing 0, or 0 when 0 is outside the support.
    std::optional<std::size_t> j0;
    StorageChoice storage = StorageChoice::Auto;
    std::size_t dense_max_q = 4000;
    double drop_tol = 1e-15;
    bool repair_dropped_mass = true;
    unsigned threads = 0;
};

struct RowIntegrals {
    std::vector<double> cells;
    double total = 0.0;
};

/// Per-cell quadrature of y -> inf_{t in cell i} p(t, y) over every target
/// cell j. The total is the sum of the cell integrals.
RowIntegrals cell_row_integrals(const KernelModel& model, const Partition& p, std::size_t i,
                                const QuadratureRule& quad, const InfStrategy& strategy);

/// sum_i w_i * integral of f(y) * inf_{t in cell i} p(t, y) over the support,
/// using the same cell rule and branch splitting as assembly; with f = 1 each
/// row contributes exactly w_i * T_i.
double weighted_row_integral(const KernelModel& model, const Partition& p, std::span<const double> weights,
                             const std::function<double(double)>& f, const QuadratureRule& quad,
                             const InfStrategy& strategy, unsigned threads = 0);

DiscretizedChain assemble_matrix(const KernelModel& model, const Partition& p, const AssemblyOptions& options = {});

/// `i,j,value` rows for entries >= drop_tol.
void write_triplets(const DiscretizedChain& chain, std::ostream& out);

}  // namespace stationary
