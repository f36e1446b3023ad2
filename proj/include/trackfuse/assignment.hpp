#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "trackfuse/linalg.hpp"

namespace trackfuse {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Rectangular linear assignment (rows <= cols) with potentials. Entries equal to
/// +inf are forbidden. Returns the column of each row, or an empty vector when no
/// finite assignment exists.
std::vector<int> solve_linear_assignment(const Matrix& cost);

/// Sparse K-dimensional assignment problem. Element i in dimension d is referred
/// to by index i in 1..dim_sizes[d]; index 0 means "none". Elements of dimension 0
/// are covered exactly once when first_mandatory is set; every other element is
/// covered at most once. Elements left uncovered cost nothing.
struct AssignmentTable {
    std::vector<int> dim_sizes;
    bool first_mandatory = true;
    std::vector<std::vector<int>> tuples;
    std::vector<double> costs;

    std::size_t dims() const { return dim_sizes.size(); }
    std::size_t size() const { return tuples.size(); }
    void add(std::vector<int> tuple, double cost);
    /// Throws ConfigurationError on malformed tuples.
    void validate() const;
};

struct AssociationSolution {
    std::vector<std::size_t> selected;             // indices into the table, ascending
    std::vector<std::vector<int>> assignments;     // the selected tuples
    double total_cost = kInf;
    bool feasible = false;
    double gap = 0.0;
    double dual_bound = -kInf;
    int iterations = 0;
};

/// Sum of selected costs in ascending table order.
double solution_cost(const AssignmentTable& table, const std::vector<std::size_t>& selected);

/// Empty string when the selection satisfies the coverage constraints, a reason otherwise.
std::string check_constraints(const AssignmentTable& table, const std::vector<std::size_t>& selected);

struct ExactSolverOptions {
    std::size_t max_tuples = 200000;
    std::size_t max_nodes = 20000000;
};

/// Depth-first branch and bound; globally optimal.
AssociationSolution solve_assignment_exact(const AssignmentTable& table, const ExactSolverOptions& opts = {});

struct RelaxedSolverOptions {
    int max_iters = 200;
    double tolerance = 1e-9;
};

/// Lagrangian relaxation onto the first two dimensions with subgradient updates and
/// recursive primal recovery. Two-dimensional tables are solved exactly.
AssociationSolution solve_assignment_relaxed(const AssignmentTable& table, const RelaxedSolverOptions& opts = {});

}  // namespace trackfuse
