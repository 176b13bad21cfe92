#pragma once

#include <vector>

#include "eths/params.hpp"

namespace eths {

// Dense two-phase primal simplex for
//   min c'x  s.t.  A_i x (=,<=,>=) b_i,  0 <= x <= ub.
struct LinearProgram {
    enum class Sense { eq, le, ge };
    struct Row {
        std::vector<std::pair<int, double>> terms;
        Sense sense;
        double rhs;
    };

    int add_var(double cost, double ub = kInf);
    void add_row(std::vector<std::pair<int, double>> terms, Sense sense, double rhs);

    std::vector<double> cost;
    std::vector<double> upper;
    std::vector<Row> rows;
};

struct LpSolution {
    enum class Status { optimal, infeasible, unbounded, iteration_limit };
    Status status = Status::infeasible;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<double> row_dual;      // y_i for each row, sign w.r.t. the row as written
    std::vector<double> reduced_cost;  // c_j - sum_i A_ij y_i
    int iterations = 0;
};

LpSolution solve_lp(const LinearProgram& lp, int max_iterations = 200000);

// Largest violation of primal feasibility, dual sign conditions and complementary
// slackness for the pair (x, y), recomputed from the LP data.
double complementary_slackness_residual(const LinearProgram& lp, const LpSolution& sol);

}  // namespace eths
