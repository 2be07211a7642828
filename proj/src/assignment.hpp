#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace pmbm::assignment {

/// Rectangular cost matrix, rows <= cols. Rows are measurements, columns are
/// candidate pairings; +infinity marks a forbidden pairing. Entries are
/// negative log-likelihood costs.
class CostMatrix {
public:
    static constexpr double kForbidden = std::numeric_limits<double>::infinity();

    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = kForbidden)
        : rows_(rows), cols_(cols), cells_(rows * cols, fill) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    double& at(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> cells_;
};

/// An injective row -> column mapping and the sum of the selected entries.
struct Assignment {
    std::vector<int> row_to_col;  ///< one column per row, columns distinct
    double total_cost = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (shortest
/// augmenting path). Ties prefer the lowest column index. Throws
/// InfeasibleError naming an unmatchable row when no finite-cost complete
/// assignment exists, std::invalid_argument when rows > cols.
Assignment hungarian(const CostMatrix& cost);

/// The min(k, #feasible) cheapest assignments in nondecreasing cost order,
/// all distinct; equal-cost solutions are ordered lexicographically by their
/// row_to_col vector. The first element always matches hungarian(cost).
/// Throws InfeasibleError when infeasible and std::invalid_argument for k < 1.
std::vector<Assignment> murty_kbest(const CostMatrix& cost, int k);

/// Exhaustive-enumeration oracle with the same contract as murty_kbest.
/// Throws std::invalid_argument when rows > 7.
std::vector<Assignment> brute_force_kbest(const CostMatrix& cost, int k);

}  // namespace pmbm::assignment
