#include "stationary/discretize.hpp"

#include "stationary/errors.hpp"
#include "stationary/parallel.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <ostream>

namespace stationary {

// ---------------------------------------------------------------------------
// StochasticMatrix

StochasticMatrix StochasticMatrix::dense(std::size_t n, std::vector<double> row_major) {
    if (row_major.size() != n * n) throw DimensionMismatch("dense matrix data does not match n*n");
    StochasticMatrix m;
    m.storage_ = Storage::Dense;
    m.n_ = n;
    m.dense_ = std::move(row_major);
    return m;
}

StochasticMatrix StochasticMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    std::vector<double> data;
    data.reserve(n * n);
    for (const auto& r : rows) {
        if (r.size() != n) throw DimensionMismatch("matrix rows must all have length n");
        data.insert(data.end(), r.begin(), r.end());
    }
    return dense(n, std::move(data));
}

StochasticMatrix StochasticMatrix::sparse(std::size_t n, std::vector<std::size_t> row_ptr,
                                          std::vector<std::uint32_t> cols, std::vector<double> values) {
    if (row_ptr.size() != n + 1 || row_ptr.back() != cols.size() || cols.size() != values.size())
        throw DimensionMismatch("inconsistent CSR arrays");
    StochasticMatrix m;
    m.storage_ = Storage::Sparse;
    m.n_ = n;
    m.row_ptr_ = std::move(row_ptr);
    m.cols_ = std::move(cols);
    m.values_ = std::move(values);
    return m;
}

std::size_t StochasticMatrix::nonzeros() const noexcept {
    if (storage_ == Storage::Sparse) return values_.size();
    return static_cast<std::size_t>(std::count_if(dense_.begin(), dense_.end(), [](double v) { return v != 0.0; }));
}

double StochasticMatrix::operator()(std::size_t i, std::size_t j) const {
    if (storage_ == Storage::Dense) return dense_[i * n_ + j];
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(j));
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - cols_.begin())];
}

double StochasticMatrix::row_sum(std::size_t i) const {
    double s = 0.0;
    for_each_in_row(i, [&](std::size_t, double v) { s += v; });
    return s;
}

void StochasticMatrix::left_multiply(std::span<const double> v, std::span<double> out, unsigned threads) const {
    if (v.size() != n_ || out.size() != n_) throw DimensionMismatch("vector length does not match matrix size");
    const unsigned t = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n_));
    auto accumulate_rows = [&](std::span<double> acc, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double w = v[i];
            if (w == 0.0) continue;
            for_each_in_row(i, [&](std::size_t j, double b) { acc[j] += w * b; });
        }
    };
    if (t <= 1) {
        std::fill(out.begin(), out.end(), 0.0);
        accumulate_rows(out, 0, n_);
        return;
    }
    std::vector<std::vector<double>> partial(t, std::vector<double>(n_, 0.0));
    parallel_chunks(n_, t, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        accumulate_rows(partial[chunk], begin, end);
    });
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& p : partial)
        for (std::size_t j = 0; j < n_; ++j) out[j] += p[j];
}

std::vector<double> StochasticMatrix::to_dense() const {
    if (storage_ == Storage::Dense) return dense_;
    std::vector<double> d(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) for_each_in_row(i, [&](std::size_t j, double b) { d[i * n_ + j] = b; });
    return d;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

/// Quadrature nodes for every target cell, laid out cell-major.
struct NodeLayout {
    std::vector<double> ys;
    std::vector<double> weights;
    std::size_t per_cell;
    QuadratureRule rule;
    const std::function<double(double)>* f = nullptr;
};

/// With `f`, the node weights absorb f(y) so cell integrals become integrals of f * inf.
NodeLayout make_nodes(const Partition& p, const QuadratureRule& quad,
                      const std::function<double(double)>* f = nullptr) {
    const std::size_t q = p.q_max();
    const std::size_t nq = static_cast<std::size_t>(quad.size());
    NodeLayout layout{std::vector<double>(q * nq), std::vector<double>(q * nq), nq, quad, f};
    for (std::size_t j = 0; j < q; ++j) {
        const double a = p.cell_lo(j), len = p.cell_hi(j) - a;
        for (std::size_t n = 0; n < nq; ++n) {
            const double y = a + len * quad.nodes()[n];
            layout.ys[j * nq + n] = y;
            layout.weights[j * nq + n] = len * quad.weights()[n] * (f ? (*f)(y) : 1.0);
        }
    }
    return layout;
}

void integrate_cells(const NodeLayout& layout, std::span<const double> inf, std::vector<double>& cells) {
    const std::size_t q = cells.size(), nq = layout.per_cell;
    for (std::size_t j = 0; j < q; ++j) {
        double m = 0.0;
        for (std::size_t n = 0; n < nq; ++n) m += layout.weights[j * nq + n] * inf[j * nq + n];
        cells[j] = m;
    }
}

/// Integral of min(p(a, y), p(b, y)) over [lo, hi] when p(a, .) - p(b, .)
/// changes sign inside: the crossing is located by bisection and each side
/// gets its own rule.
template <class P>
double split_cell_integral(const P& p, double a, double b, double lo, double hi, const NodeLayout& layout) {
    const auto gap = [&](double y) { return p(a, y) - p(b, y); };
    const bool lo_positive = gap(lo) > 0.0;
    double l = lo, h = hi;
    for (int it = 0; it < 200 && h - l > 1e-15 * std::max(1.0, std::abs(l)); ++it) {
        const double m = 0.5 * (l + h);
        if ((gap(m) > 0.0) == lo_positive)
            l = m;
        else
            h = m;
    }
    const double cut = 0.5 * (l + h);
    const auto inf = [&](double y) { return std::min(p(a, y), p(b, y)) * (layout.f ? (*layout.f)(y) : 1.0); };
    return layout.rule.integrate(inf, lo, cut) + layout.rule.integrate(inf, cut, hi);
}

/// Cell integrals of the row infimum for rows [begin, end), handed to
/// `sink(i, cells)` in order.
template <class P, class Sink>
void sweep_rows(const P& p, const Partition& part, const NodeLayout& layout, const InfStrategy& strategy,
                std::size_t begin, std::size_t end, Sink&& sink) {
    const std::size_t nodes = layout.ys.size();
    const std::size_t q = part.q_max();
    std::vector<double> inf(nodes), cells(q);
    if (strategy.kind == InfStrategy::Kind::EndpointMin) {
        // consecutive cells share an endpoint: keep the previous column of kernel values
        std::vector<double> left(nodes), right(nodes), left_edge(q + 1), right_edge(q + 1);
        const double x0 = part.point(begin);
        for (std::size_t n = 0; n < nodes; ++n) left[n] = p(x0, layout.ys[n]);
        for (std::size_t j = 0; j <= q; ++j) left_edge[j] = p(x0, part.point(j));
        for (std::size_t i = begin; i < end; ++i) {
            const double xa = part.point(i), x1 = part.point(i + 1);
            for (std::size_t n = 0; n < nodes; ++n) {
                right[n] = p(x1, layout.ys[n]);
                inf[n] = std::min(left[n], right[n]);
            }
            for (std::size_t j = 0; j <= q; ++j) right_edge[j] = p(x1, part.point(j));
            integrate_cells(layout, inf, cells);
            // the minimum switches branch inside a cell: integrate each side separately
            for (std::size_t j = 0; j < q; ++j) {
                const double g0 = left_edge[j] - right_edge[j], g1 = left_edge[j + 1] - right_edge[j + 1];
                if (g0 * g1 < 0.0)
                    cells[j] = split_cell_integral(p, xa, x1, part.cell_lo(j), part.cell_hi(j), layout);
            }
            sink(i, std::span<const double>(cells));
            std::swap(left, right);
            std::swap(left_edge, right_edge);
        }
    } else {
        for (std::size_t i = begin; i < end; ++i) {
            const double a = part.cell_lo(i), b = part.cell_hi(i);
            for (std::size_t n = 0; n < nodes; ++n) inf[n] = cell_inf_with(p, a, b, layout.ys[n], strategy);
            integrate_cells(layout, inf, cells);
            sink(i, std::span<const double>(cells));
        }
    }
}

struct RowChunk {
    std::vector<std::size_t> lengths;
    std::vector<std::uint32_t> cols;
    std::vector<double> values;
    std::vector<std::string> warnings;
};

}  // namespace

RowIntegrals cell_row_integrals(const KernelModel& model, const Partition& p, std::size_t i,
                                const QuadratureRule& quad, const InfStrategy& strategy) {
    if (i >= p.q_max()) throw ValidationError("row index out of range");
    const NodeLayout layout = make_nodes(p, quad);
    RowIntegrals out{std::vector<double>(p.q_max()), 0.0};
    model.visit_kernel([&](const auto& kernel) {
        sweep_rows(kernel, p, layout, strategy, i, i + 1,
                   [&](std::size_t, std::span<const double> cells) {
                       std::copy(cells.begin(), cells.end(), out.cells.begin());
                       out.total = std::accumulate(cells.begin(), cells.end(), 0.0);
                   });
    });
    return out;
}

double weighted_row_integral(const KernelModel& model, const Partition& p, std::span<const double> weights,
                             const std::function<double(double)>& f, const QuadratureRule& quad,
                             const InfStrategy& strategy, unsigned threads) {
    const std::size_t q = p.q_max();
    if (weights.size() != q) throw DimensionMismatch("one weight per cell expected");
    const NodeLayout layout = make_nodes(p, quad, &f);
    const unsigned t = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), q));
    std::vector<double> partial(std::max(1u, t), 0.0);
    parallel_chunks(q, t, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        // skip the sweep's leading rows with zero weight
        while (begin < end && weights[begin] == 0.0) ++begin;
        if (begin == end) return;
        model.visit_kernel([&](const auto& kernel) {
            sweep_rows(kernel, p, layout, strategy, begin, end, [&](std::size_t i, std::span<const double> cells) {
                if (weights[i] != 0.0) partial[chunk] += weights[i] * std::accumulate(cells.begin(), cells.end(), 0.0);
            });
        });
    });
    return std::accumulate(partial.begin(), partial.end(), 0.0);
}

DiscretizedChain assemble_matrix(const KernelModel& model, const Partition& p, const AssemblyOptions& options) {
    const std::size_t q = p.q_max();
    const std::size_t n = q + 1;
    if (n > std::numeric_limits<std::uint32_t>::max()) throw ValidationError("partition too large");

    std::size_t j0;
    if (options.j0) {
        j0 = *options.j0;
        if (j0 >= q) throw ValidationError(fmt::format("j0 = {} outside [0, {})", j0, q));
    } else {
        j0 = locate_cell(p, 0.0).value_or(0);
    }
    const InfStrategy strategy = options.strategy.value_or(model.default_inf_strategy());
    if (strategy.kind == InfStrategy::Kind::Sampled && strategy.samples < 2)
        throw ValidationError("sampled infimum needs at least 2 points");

    bool dense = false;
    switch (options.storage) {
        case AssemblyOptions::StorageChoice::Auto: dense = q <= options.dense_max_q; break;
        case AssemblyOptions::StorageChoice::Dense: dense = true; break;
        case AssemblyOptions::StorageChoice::Sparse: dense = false; break;
    }

    const NodeLayout layout = make_nodes(p, options.quadrature);
    std::vector<double> totals(q);
    std::vector<double> dense_data;
    if (dense) dense_data.assign(n * n, 0.0);

    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(options.threads), q));
    std::vector<RowChunk> chunks(threads);

    parallel_chunks(q, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        RowChunk& out = chunks[chunk];
        std::vector<double> cells(q);
        model.visit_kernel([&](const auto& kernel) {
            sweep_rows(kernel, p, layout, strategy, begin, end, [&](std::size_t i, std::span<const double> row) {
                std::copy(row.begin(), row.end(), cells.begin());
                const double total = std::accumulate(cells.begin(), cells.end(), 0.0);
                totals[i] = total;

                const double defect = 1.0 - total;
                if (defect < -1e-9)
                    out.warnings.push_back(fmt::format(
                        "DefectNegative: row {} integrates to {:.12g} > 1; quadrature too coarse", i, total));
                const double scale = total > 1.0 ? 1.0 / total : 1.0;
                double dropped = 0.0;
                for (std::size_t j = 0; j < q; ++j) {
                    double v = cells[j] * scale;
                    if (j != j0 && v < options.drop_tol) {
                        dropped += v;
                        v = 0.0;
                    }
                    cells[j] = v;
                }
                cells[j0] += std::max(0.0, defect) + (options.repair_dropped_mass ? dropped : 0.0);

                if (dense) {
                    std::copy(cells.begin(), cells.end(), dense_data.begin() + static_cast<std::ptrdiff_t>(i * n));
                } else {
                    std::size_t len = 0;
                    for (std::size_t j = 0; j < q; ++j) {
                        if (cells[j] != 0.0 || j == j0) {
                            out.cols.push_back(static_cast<std::uint32_t>(j));
                            out.values.push_back(cells[j]);
                            ++len;
                        }
                    }
                    out.lengths.push_back(len);
                }
            });
        });
    });

    std::vector<std::string> warnings;
    for (auto& c : chunks) warnings.insert(warnings.end(), c.warnings.begin(), c.warnings.end());

    std::optional<StochasticMatrix> matrix;
    if (dense) {
        dense_data[q * n + j0] = 1.0;
        matrix = StochasticMatrix::dense(n, std::move(dense_data));
    } else {
        std::vector<std::size_t> row_ptr{0};
        row_ptr.reserve(n + 1);
        std::size_t nnz = 1;
        for (const auto& c : chunks) nnz += c.values.size();
        std::vector<std::uint32_t> cols;
        std::vector<double> values;
        cols.reserve(nnz);
        values.reserve(nnz);
        for (auto& c : chunks) {
            for (std::size_t len : c.lengths) row_ptr.push_back(row_ptr.back() + len);
            cols.insert(cols.end(), c.cols.begin(), c.cols.end());
            values.insert(values.end(), c.values.begin(), c.values.end());
            c = RowChunk{};
        }
        cols.push_back(static_cast<std::uint32_t>(j0));
        values.push_back(1.0);
        row_ptr.push_back(row_ptr.back() + 1);
        matrix = StochasticMatrix::sparse(n, std::move(row_ptr), std::move(cols), std::move(values));
    }

    return DiscretizedChain{std::move(*matrix), std::move(totals), p,        j0,
                            p.point(j0),        model,             options.quadrature,
                            strategy,           options.drop_tol,  std::move(warnings)};
}

void write_triplets(const DiscretizedChain& chain, std::ostream& out) {
    out << "i,j,value\n";
    for (std::size_t i = 0; i < chain.matrix.size(); ++i)
        chain.matrix.for_each_in_row(i, [&](std::size_t j, double v) {
            if (v >= chain.drop_tol) fmt::print(out, "{},{},{:.15g}\n", i, j, v);
        });
}

}  // namespace stationary
