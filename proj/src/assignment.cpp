#include "trackfuse/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "trackfuse/errors.hpp"

namespace trackfuse {

std::vector<int> solve_linear_assignment(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    if (n == 0) {
        return {};
    }
    if (n > m) {
        throw ConfigurationError("solve_linear_assignment: more rows than columns");
    }
    // Shortest augmenting paths with row/column potentials, 1-based internally.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (j1 < 0 || !std::isfinite(delta)) {
                return {};
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
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j] != 0) {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    return row_to_col;
}

void AssignmentTable::add(std::vector<int> tuple, double cost) {
    tuples.push_back(std::move(tuple));
    costs.push_back(cost);
}

void AssignmentTable::validate() const {
    if (tuples.size() != costs.size()) {
        throw ConfigurationError("assignment table: tuple/cost count mismatch");
    }
    for (std::size_t t = 0; t < tuples.size(); ++t) {
        const auto& tup = tuples[t];
        if (tup.size() != dim_sizes.size()) {
            throw ConfigurationError("assignment table: tuple " + std::to_string(t) + " has wrong arity");
        }
        bool any = false;
        for (std::size_t d = 0; d < tup.size(); ++d) {
            if (tup[d] < 0 || tup[d] > dim_sizes[d]) {
                throw ConfigurationError("assignment table: tuple " + std::to_string(t) + " index out of range");
            }
            any = any || tup[d] != 0;
        }
        if (!any) {
            throw ConfigurationError("assignment table: all-zero tuple " + std::to_string(t));
        }
        if (std::isnan(costs[t])) {
            throw ConfigurationError("assignment table: NaN cost at tuple " + std::to_string(t));
        }
    }
}

double solution_cost(const AssignmentTable& table, const std::vector<std::size_t>& selected) {
    std::vector<std::size_t> sorted = selected;
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    for (std::size_t t : sorted) {
        total += table.costs[t];
    }
    return total;
}

std::string check_constraints(const AssignmentTable& table, const std::vector<std::size_t>& selected) {
    std::vector<std::vector<int>> usage(table.dims());
    for (std::size_t d = 0; d < table.dims(); ++d) {
        usage[d].assign(static_cast<std::size_t>(table.dim_sizes[d]) + 1, 0);
    }
    for (std::size_t t : selected) {
        if (t >= table.size()) {
            return "selected index out of range";
        }
        if (!std::isfinite(table.costs[t])) {
            return "selected tuple has infinite cost";
        }
        for (std::size_t d = 0; d < table.dims(); ++d) {
            ++usage[d][static_cast<std::size_t>(table.tuples[t][d])];
        }
    }
    for (std::size_t d = 0; d < table.dims(); ++d) {
        for (int i = 1; i <= table.dim_sizes[d]; ++i) {
            const int c = usage[d][static_cast<std::size_t>(i)];
            if (c > 1) {
                return "element " + std::to_string(i) + " of dimension " + std::to_string(d) + " used twice";
            }
            if (d == 0 && table.first_mandatory && c != 1) {
                return "element " + std::to_string(i) + " of dimension 0 not covered";
            }
        }
    }
    return {};
}

namespace {

AssociationSolution finish(const AssignmentTable& table, std::vector<std::size_t> selected) {
    AssociationSolution sol;
    std::sort(selected.begin(), selected.end());
    sol.selected = std::move(selected);
    for (std::size_t t : sol.selected) {
        sol.assignments.push_back(table.tuples[t]);
    }
    sol.total_cost = solution_cost(table, sol.selected);
    sol.feasible = true;
    return sol;
}

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

class BranchAndBound {
public:
    BranchAndBound(const AssignmentTable& table, const ExactSolverOptions& opts) : table_(table), opts_(opts) {
        const std::size_t K = table.dims();
        offset_.assign(K + 1, 0);
        for (std::size_t d = 0; d < K; ++d) {
            offset_[d + 1] = offset_[d] + static_cast<std::size_t>(table.dim_sizes[d]);
        }
        const std::size_t E = offset_[K];
        owned_.assign(E, {});
        optional_.assign(E, 1);
        if (table.first_mandatory && K > 0) {
            for (std::size_t e = 0; e < offset_[1]; ++e) {
                optional_[e] = 0;
            }
        }
        for (std::size_t t = 0; t < table.size(); ++t) {
            if (!std::isfinite(table.costs[t])) {
                continue;
            }
            for (std::size_t d = 0; d < K; ++d) {
                if (table.tuples[t][d] != 0) {
                    owned_[element(d, table.tuples[t][d])].push_back(t);
                    break;
                }
            }
        }
        suffix_.assign(E + 1, 0.0);
        for (std::size_t e = E; e-- > 0;) {
            auto& own = owned_[e];
            std::sort(own.begin(), own.end(),
                      [&](std::size_t a, std::size_t b) { return lex_less(table.tuples[a], table.tuples[b]); });
            double lb = optional_[e] ? 0.0 : kInf;
            for (std::size_t t : own) {
                lb = std::min(lb, table.costs[t]);
            }
            suffix_[e] = suffix_[e + 1] + lb;
        }
        covered_.assign(E, 0);
    }

    AssociationSolution run() {
        best_cost_ = kInf;
        if (std::isfinite(suffix_[0])) {
            dfs(0, 0.0);
        }
        if (!found_) {
            AssociationSolution sol;
            sol.feasible = false;
            return sol;
        }
        AssociationSolution sol = finish(table_, best_);
        sol.gap = 0.0;
        sol.dual_bound = sol.total_cost;
        sol.iterations = static_cast<int>(std::min<std::size_t>(nodes_, 2147483647u));
        return sol;
    }

private:
    std::size_t element(std::size_t d, int i) const { return offset_[d] + static_cast<std::size_t>(i - 1); }

    bool compatible(std::size_t t) const {
        const auto& tup = table_.tuples[t];
        for (std::size_t d = 0; d < tup.size(); ++d) {
            if (tup[d] != 0 && covered_[element(d, tup[d])]) {
                return false;
            }
        }
        return true;
    }

    void mark(std::size_t t, char value) {
        const auto& tup = table_.tuples[t];
        for (std::size_t d = 0; d < tup.size(); ++d) {
            if (tup[d] != 0) {
                covered_[element(d, tup[d])] = value;
            }
        }
    }

    bool improves(double cost) const {
        return !found_ || cost < best_cost_ - 1e-12 * (1.0 + std::abs(best_cost_));
    }

    void dfs(std::size_t pos, double cost) {
        if (++nodes_ > opts_.max_nodes) {
            throw ResourceError("solve_assignment_exact: node limit exceeded", nodes_);
        }
        const std::size_t E = owned_.size();
        while (pos < E && covered_[pos]) {
            ++pos;
        }
        if (pos == E) {
            if (improves(cost)) {
                found_ = true;
                best_cost_ = cost;
                best_ = current_;
            }
            return;
        }
        if (found_ && !improves(cost + suffix_[pos])) {
            return;
        }
        for (std::size_t t : owned_[pos]) {
            if (!compatible(t)) {
                continue;
            }
            mark(t, 1);
            current_.push_back(t);
            dfs(pos + 1, cost + table_.costs[t]);
            current_.pop_back();
            mark(t, 0);
        }
        if (optional_[pos]) {
            dfs(pos + 1, cost);
        }
    }

    const AssignmentTable& table_;
    ExactSolverOptions opts_;
    std::vector<std::size_t> offset_;
    std::vector<std::vector<std::size_t>> owned_;
    std::vector<char> optional_;
    std::vector<double> suffix_;
    std::vector<char> covered_;
    std::vector<std::size_t> current_;
    std::vector<std::size_t> best_;
    double best_cost_ = kInf;
    bool found_ = false;
    std::size_t nodes_ = 0;
};

// Two-dimensional projection: every (i0, i1) prefix keeps its cheapest tuple under
// the modified costs; tuples with prefix (0, 0) are unconstrained and are taken
// whenever their modified cost is negative.
struct Projected {
    bool feasible = false;
    double value = 0.0;
    std::vector<std::size_t> selected;
};

Projected solve_projected(const AssignmentTable& table, const std::vector<double>& cost) {
    const int n0 = table.dim_sizes[0];
    const int n1 = table.dims() > 1 ? table.dim_sizes[1] : 0;
    const std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> pair_best(static_cast<std::size_t>(n0) * n1, none);
    std::vector<std::size_t> row_only(n0, none), col_only(n1, none);
    Projected out;
    auto better = [&](std::size_t cand, std::size_t cur) { return cur == none || cost[cand] < cost[cur]; };
    for (std::size_t t = 0; t < table.size(); ++t) {
        if (!std::isfinite(cost[t])) {
            continue;
        }
        const int i0 = table.tuples[t][0];
        const int i1 = table.dims() > 1 ? table.tuples[t][1] : 0;
        if (i0 > 0 && i1 > 0) {
            auto& slot = pair_best[static_cast<std::size_t>(i0 - 1) * n1 + (i1 - 1)];
            if (better(t, slot)) slot = t;
        } else if (i0 > 0) {
            auto& slot = row_only[i0 - 1];
            if (better(t, slot)) slot = t;
        } else if (i1 > 0) {
            auto& slot = col_only[i1 - 1];
            if (better(t, slot)) slot = t;
        } else if (cost[t] < 0.0) {
            out.selected.push_back(t);
            out.value += cost[t];
        }
    }
    const int N = n0 + n1;
    if (N == 0) {
        out.feasible = true;
        return out;
    }
    Matrix C = Matrix::Constant(N, N, kInf);
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const std::size_t t = pair_best[static_cast<std::size_t>(i) * n1 + j];
            if (t != none) C(i, j) = cost[t];
        }
        const std::size_t t = row_only[i];
        if (table.first_mandatory) {
            C(i, n1 + i) = t != none ? cost[t] : kInf;
        } else {
            C(i, n1 + i) = t != none ? std::min(0.0, cost[t]) : 0.0;
        }
    }
    for (int j = 0; j < n1; ++j) {
        const std::size_t t = col_only[j];
        C(n0 + j, j) = t != none ? std::min(0.0, cost[t]) : 0.0;
        for (int i = 0; i < n0; ++i) {
            C(n0 + j, n1 + i) = 0.0;
        }
    }
    const std::vector<int> match = solve_linear_assignment(C);
    if (match.empty()) {
        return out;
    }
    out.feasible = true;
    for (int i = 0; i < n0; ++i) {
        const int j = match[i];
        if (j < n1) {
            const std::size_t t = pair_best[static_cast<std::size_t>(i) * n1 + j];
            out.selected.push_back(t);
            out.value += cost[t];
        } else {
            const std::size_t t = row_only[i];
            if (t != none && (table.first_mandatory || cost[t] < 0.0)) {
                out.selected.push_back(t);
                out.value += cost[t];
            }
        }
    }
    for (int j = 0; j < n1; ++j) {
        const int c = match[n0 + j];
        if (c == j) {
            const std::size_t t = col_only[j];
            if (t != none && cost[t] < 0.0) {
                out.selected.push_back(t);
                out.value += cost[t];
            }
        }
    }
    return out;
}

AssociationSolution solve_small(const AssignmentTable& table) {
    // One or two dimensions: the projection is exact.
    Projected p = solve_projected(table, table.costs);
    if (!p.feasible) {
        AssociationSolution sol;
        sol.feasible = false;
        return sol;
    }
    AssociationSolution sol = finish(table, p.selected);
    sol.gap = 0.0;
    sol.dual_bound = sol.total_cost;
    sol.iterations = 1;
    return sol;
}

// Fixes the (i0, i1) pairs picked by the relaxation and solves the remaining
// dimensions as a (K-1)-dimensional problem whose first dimension is the pairs.
AssociationSolution recover_primal(const AssignmentTable& table, const std::vector<std::size_t>& chosen,
                                   const RelaxedSolverOptions& opts) {
    const std::size_t K = table.dims();
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t t : chosen) {
        const int i0 = table.tuples[t][0];
        const int i1 = table.tuples[t][1];
        if (i0 != 0 || i1 != 0) {
            pairs.emplace_back(i0, i1);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    auto pair_index = [&](int i0, int i1) -> int {
        auto it = std::lower_bound(pairs.begin(), pairs.end(), std::make_pair(i0, i1));
        if (it == pairs.end() || *it != std::make_pair(i0, i1)) return -1;
        return static_cast<int>(it - pairs.begin()) + 1;
    };

    AssignmentTable sub;
    sub.dim_sizes.push_back(static_cast<int>(pairs.size()));
    for (std::size_t d = 2; d < K; ++d) {
        sub.dim_sizes.push_back(table.dim_sizes[d]);
    }
    sub.first_mandatory = table.first_mandatory;
    std::vector<std::size_t> origin;
    const std::size_t artificial = static_cast<std::size_t>(-1);
    for (std::size_t t = 0; t < table.size(); ++t) {
        if (!std::isfinite(table.costs[t])) continue;
        const auto& tup = table.tuples[t];
        int p = 0;
        if (tup[0] != 0 || tup[1] != 0) {
            p = pair_index(tup[0], tup[1]);
            if (p < 0) continue;
        }
        std::vector<int> nt;
        nt.push_back(p);
        nt.insert(nt.end(), tup.begin() + 2, tup.end());
        if (std::all_of(nt.begin(), nt.end(), [](int v) { return v == 0; })) continue;
        sub.add(std::move(nt), table.costs[t]);
        origin.push_back(t);
    }
    if (table.first_mandatory) {
        // Pairs without a dimension-0 element stay optional.
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            if (pairs[p].first == 0) {
                std::vector<int> nt(sub.dims(), 0);
                nt[0] = static_cast<int>(p) + 1;
                sub.add(std::move(nt), 0.0);
                origin.push_back(artificial);
            }
        }
    }
    RelaxedSolverOptions inner = opts;
    inner.max_iters = std::max(10, opts.max_iters / 4);
    const AssociationSolution s = solve_assignment_relaxed(sub, inner);
    if (!s.feasible) {
        return s;
    }
    std::vector<std::size_t> selected;
    for (std::size_t st : s.selected) {
        if (origin[st] != artificial) selected.push_back(origin[st]);
    }
    return finish(table, selected);
}

}  // namespace

AssociationSolution solve_assignment_exact(const AssignmentTable& table, const ExactSolverOptions& opts) {
    table.validate();
    if (table.size() > opts.max_tuples) {
        throw ResourceError("solve_assignment_exact: table too large", table.size());
    }
    BranchAndBound bb(table, opts);
    return bb.run();
}

AssociationSolution solve_assignment_relaxed(const AssignmentTable& table, const RelaxedSolverOptions& opts) {
    table.validate();
    const std::size_t K = table.dims();
    if (K == 0) {
        AssociationSolution sol = finish(table, {});
        sol.total_cost = 0.0;
        sol.dual_bound = 0.0;
        return sol;
    }
    if (K <= 2) {
        return solve_small(table);
    }

    std::vector<std::vector<double>> u(K);
    for (std::size_t d = 2; d < K; ++d) {
        u[d].assign(static_cast<std::size_t>(table.dim_sizes[d]) + 1, 0.0);
    }
    std::vector<double> modified(table.size());
    AssociationSolution best;
    best.feasible = false;
    double best_dual = -kInf;
    double theta = 1.0;
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        double u_sum = 0.0;
        for (std::size_t d = 2; d < K; ++d) {
            u_sum += std::accumulate(u[d].begin(), u[d].end(), 0.0);
        }
        for (std::size_t t = 0; t < table.size(); ++t) {
            double c = table.costs[t];
            for (std::size_t d = 2; d < K; ++d) {
                c += u[d][static_cast<std::size_t>(table.tuples[t][d])];
            }
            modified[t] = c;
        }
        const Projected proj = solve_projected(table, modified);
        if (!proj.feasible) {
            break;
        }
        const double dual = proj.value - u_sum;
        if (dual > best_dual) {
            best_dual = dual;
        } else {
            theta *= 0.5;
        }

        const AssociationSolution primal = recover_primal(table, proj.selected, opts);
        if (primal.feasible && (!best.feasible || primal.total_cost < best.total_cost)) {
            best = primal;
        }
        if (best.feasible && best.total_cost - best_dual <= opts.tolerance * (1.0 + std::abs(best.total_cost))) {
            ++it;
            break;
        }

        std::vector<std::vector<double>> g(K);
        double norm2 = 0.0;
        for (std::size_t d = 2; d < K; ++d) {
            g[d].assign(u[d].size(), -1.0);
            g[d][0] = 0.0;
        }
        for (std::size_t t : proj.selected) {
            for (std::size_t d = 2; d < K; ++d) {
                const int i = table.tuples[t][d];
                if (i != 0) g[d][static_cast<std::size_t>(i)] += 1.0;
            }
        }
        for (std::size_t d = 2; d < K; ++d) {
            for (std::size_t i = 1; i < g[d].size(); ++i) {
                if (u[d][i] <= 0.0 && g[d][i] < 0.0) g[d][i] = 0.0;
                norm2 += g[d][i] * g[d][i];
            }
        }
        if (norm2 == 0.0) {
            ++it;
            break;
        }
        const double target = best.feasible ? best.total_cost : dual + 0.1 * std::abs(dual) + 1.0;
        const double step = theta * std::max(target - dual, 1e-12) / norm2;
        for (std::size_t d = 2; d < K; ++d) {
            for (std::size_t i = 1; i < u[d].size(); ++i) {
                u[d][i] = std::max(0.0, u[d][i] + step * g[d][i]);
            }
        }
        if (theta < 1e-8) {
            ++it;
            break;
        }
    }
    if (!best.feasible) {
        best.iterations = it;
        best.dual_bound = best_dual;
        return best;
    }
    best.dual_bound = best_dual;
    best.iterations = it;
    best.gap = std::max(0.0, (best.total_cost - best_dual) / std::max(std::abs(best_dual), 1e-12));
    return best;
}

}  // namespace trackfuse
