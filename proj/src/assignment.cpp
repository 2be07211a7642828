#include "assignment.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <utility>

namespace pmbm::assignment {

namespace {

// Forbidden pairings become a large finite sentinel internally so the
// augmenting-path arithmetic stays total; the sentinel never leaks into
// reported costs.
constexpr double kSentinel = 1e100;

double sum_selected(const CostMatrix& cost, const std::vector<int>& row_to_col) {
    double total = 0.0;
    for (std::size_t r = 0; r < row_to_col.size(); ++r) {
        total += cost.at(r, static_cast<std::size_t>(row_to_col[r]));
    }
    return total;
}

void check_rows_have_finite(const CostMatrix& cost) {
    for (std::size_t r = 0; r < cost.rows(); ++r) {
        bool any = false;
        for (std::size_t c = 0; c < cost.cols() && !any; ++c) {
            any = std::isfinite(cost.at(r, c));
        }
        if (!any) {
            throw InfeasibleError("assignment infeasible: row " + std::to_string(r) +
                                      " has no finite-cost column",
                                  static_cast<int>(r));
        }
    }
}

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Ordering used everywhere k-best solutions are ranked.
bool assignment_less(const Assignment& a, const Assignment& b) {
    if (a.total_cost != b.total_cost) return a.total_cost < b.total_cost;
    return lex_less(a.row_to_col, b.row_to_col);
}

}  // namespace

Assignment hungarian(const CostMatrix& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n > m) {
        throw std::invalid_argument("hungarian: rows (" + std::to_string(n) +
                                    ") exceed cols (" + std::to_string(m) + ")");
    }
    if (n == 0) return Assignment{{}, 0.0};
    check_rows_have_finite(cost);

    std::vector<double> a(static_cast<std::size_t>(n) * m);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < m; ++c) {
            const double v = cost.at(r, c);
            a[static_cast<std::size_t>(r) * m + c] = std::isfinite(v) ? v : kSentinel;
        }
    }

    // Shortest augmenting path with potentials (1-based; column 0 is virtual).
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a[static_cast<std::size_t>(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {  // strict: lowest column index wins ties
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    Assignment out;
    out.row_to_col.assign(n, -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j] != 0) out.row_to_col[p[j] - 1] = j - 1;
    }
    for (int r = 0; r < n; ++r) {
        if (!std::isfinite(cost.at(r, out.row_to_col[r]))) {
            throw InfeasibleError("assignment infeasible: row " + std::to_string(r) +
                                      " cannot be matched without a forbidden pairing",
                                  r);
        }
    }
    out.total_cost = sum_selected(cost, out.row_to_col);
    return out;
}

namespace {

struct MurtyNode {
    std::vector<std::pair<int, int>> forced;
    std::vector<std::pair<int, int>> forbidden;
    Assignment solution;
};

// Re-solve under (forced, forbidden) pair constraints by masking a copy of
// the matrix; forcing (r, c) leaves (r, c) as the only finite entry in row r
// and column c.
Assignment solve_constrained(const CostMatrix& cost,
                             const std::vector<std::pair<int, int>>& forced,
                             const std::vector<std::pair<int, int>>& forbidden) {
    CostMatrix masked = cost;
    for (const auto& [r, c] : forbidden) {
        masked.at(r, c) = CostMatrix::kForbidden;
    }
    for (const auto& [r, c] : forced) {
        for (std::size_t j = 0; j < masked.cols(); ++j) {
            if (static_cast<int>(j) != c) masked.at(r, j) = CostMatrix::kForbidden;
        }
        for (std::size_t i = 0; i < masked.rows(); ++i) {
            if (static_cast<int>(i) != r) masked.at(i, c) = CostMatrix::kForbidden;
        }
        masked.at(r, c) = cost.at(r, c);
    }
    return hungarian(masked);
}

}  // namespace

std::vector<Assignment> murty_kbest(const CostMatrix& cost, int k) {
    if (k < 1) {
        throw std::invalid_argument("murty_kbest: k must be >= 1, got " + std::to_string(k));
    }

    auto node_greater = [](const MurtyNode& a, const MurtyNode& b) {
        return assignment_less(b.solution, a.solution);
    };
    std::priority_queue<MurtyNode, std::vector<MurtyNode>, decltype(node_greater)> queue(
        node_greater);

    MurtyNode root;
    root.solution = hungarian(cost);  // propagates InfeasibleError
    queue.push(std::move(root));

    std::vector<Assignment> results;
    while (!queue.empty() && static_cast<int>(results.size()) < k) {
        MurtyNode node = queue.top();
        queue.pop();
        results.push_back(node.solution);

        // Partition the node's remaining solution space on its free pairs.
        std::vector<char> is_forced(cost.rows(), 0);
        for (const auto& [r, c] : node.forced) {
            (void)c;
            is_forced[r] = 1;
        }
        std::vector<std::pair<int, int>> free_pairs;
        for (std::size_t r = 0; r < node.solution.row_to_col.size(); ++r) {
            if (!is_forced[r]) free_pairs.emplace_back(static_cast<int>(r),
                                                       node.solution.row_to_col[r]);
        }

        for (std::size_t i = 0; i < free_pairs.size(); ++i) {
            MurtyNode child;
            child.forced = node.forced;
            child.forced.insert(child.forced.end(), free_pairs.begin(), free_pairs.begin() + i);
            child.forbidden = node.forbidden;
            child.forbidden.push_back(free_pairs[i]);
            try {
                child.solution = solve_constrained(cost, child.forced, child.forbidden);
            } catch (const InfeasibleError&) {
                continue;  // empty subspace
            }
            queue.push(std::move(child));
        }
    }
    return results;
}

std::vector<Assignment> brute_force_kbest(const CostMatrix& cost, int k) {
    if (k < 1) {
        throw std::invalid_argument("brute_force_kbest: k must be >= 1, got " + std::to_string(k));
    }
    if (cost.rows() > 7) {
        throw std::invalid_argument("brute_force_kbest: enumeration bounded to 7 rows, got " +
                                    std::to_string(cost.rows()));
    }
    if (cost.rows() > cost.cols()) {
        throw std::invalid_argument("brute_force_kbest: rows exceed cols");
    }

    std::vector<Assignment> all;
    std::vector<int> row_to_col(cost.rows(), -1);
    std::vector<char> col_used(cost.cols(), 0);

    auto recurse = [&](auto&& self, std::size_t row) -> void {
        if (row == cost.rows()) {
            all.push_back(Assignment{row_to_col, sum_selected(cost, row_to_col)});
            return;
        }
        for (std::size_t c = 0; c < cost.cols(); ++c) {
            if (col_used[c] || !std::isfinite(cost.at(row, c))) continue;
            col_used[c] = 1;
            row_to_col[row] = static_cast<int>(c);
            self(self, row + 1);
            col_used[c] = 0;
        }
    };
    recurse(recurse, 0);

    if (all.empty() && cost.rows() > 0) {
        throw InfeasibleError("assignment infeasible: no injective finite-cost selection exists");
    }
    if (all.empty()) {
        all.push_back(Assignment{{}, 0.0});  // zero rows: the empty assignment
    }

    std::sort(all.begin(), all.end(), assignment_less);
    if (static_cast<int>(all.size()) > k) all.resize(k);
    return all;
}

}  // namespace pmbm::assignment
