#include "eths/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace eths {

int LinearProgram::add_var(double c, double ub) {
    cost.push_back(c);
    upper.push_back(ub);
    return static_cast<int>(cost.size()) - 1;
}

void LinearProgram::add_row(std::vector<std::pair<int, double>> terms, Sense sense, double rhs) {
    rows.push_back({std::move(terms), sense, rhs});
}

namespace {

constexpr double kPivTol = 1e-9;
constexpr double kCostTol = 1e-10;

class Tableau {
public:
    Tableau(int m, int n) : m_(m), n_(n), a_(static_cast<std::size_t>(m) * (n + 1), 0.0), d_(n + 1, 0.0), basis_(m, -1) {}

    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * (n_ + 1) + j]; }
    double& rhs(int i) { return at(i, n_); }
    std::vector<double>& d() { return d_; }
    std::vector<int>& basis() { return basis_; }

    void pivot(int r, int c) {
        double* row = &a_[static_cast<std::size_t>(r) * (n_ + 1)];
        double inv = 1.0 / row[c];
        for (int j = 0; j <= n_; ++j) row[j] *= inv;
        row[c] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* o = &a_[static_cast<std::size_t>(i) * (n_ + 1)];
            double f = o[c];
            if (f == 0.0) continue;
            for (int j = 0; j <= n_; ++j) o[j] -= f * row[j];
            o[c] = 0.0;
        }
        double f = d_[c];
        if (f != 0.0) {
            for (int j = 0; j <= n_; ++j) d_[j] -= f * row[j];
            d_[c] = 0.0;
        }
        basis_[r] = c;
    }

    // Returns false on unboundedness; iterations counted into it.
    enum class Result { optimal, unbounded, limit };
    Result run(const std::vector<char>& allowed, int& it, int max_it) {
        int degenerate = 0;
        while (true) {
            if (it >= max_it) return Result::limit;
            bool bland = degenerate > 50;
            int c = -1;
            double best = -kCostTol;
            for (int j = 0; j < n_; ++j) {
                if (!allowed[j]) continue;
                if (d_[j] < best) {
                    c = j;
                    if (bland) break;
                    best = d_[j];
                }
            }
            if (c < 0) return Result::optimal;
            int r = -1;
            double ratio = 0.0;
            for (int i = 0; i < m_; ++i) {
                double v = at(i, c);
                if (v <= kPivTol) continue;
                double q = rhs(i) / v;
                if (r < 0 || q < ratio - 1e-12 || (q <= ratio + 1e-12 && basis_[i] < basis_[r])) {
                    r = i;
                    ratio = q;
                }
            }
            if (r < 0) return Result::unbounded;
            degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;
            pivot(r, c);
            ++it;
        }
    }

    int m_, n_;

private:
    std::vector<double> a_;
    std::vector<double> d_;
    std::vector<int> basis_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, int max_iterations) {
    const int n0 = static_cast<int>(lp.cost.size());
    const int r0 = static_cast<int>(lp.rows.size());
    std::vector<int> ub_vars;
    for (int j = 0; j < n0; ++j)
        if (std::isfinite(lp.upper[j])) ub_vars.push_back(j);
    const int m = r0 + static_cast<int>(ub_vars.size());

    int n_slack = 0;
    for (const auto& row : lp.rows)
        if (row.sense != LinearProgram::Sense::eq) ++n_slack;
    n_slack += static_cast<int>(ub_vars.size());
    const int art0 = n0 + n_slack;
    const int n = art0 + m;

    Tableau t(m, n);
    std::vector<double> sign(m, 1.0);
    int sc = n0;
    for (int i = 0; i < r0; ++i) {
        const auto& row = lp.rows[i];
        for (auto [j, v] : row.terms) t.at(i, j) += v;
        if (row.sense == LinearProgram::Sense::le) t.at(i, sc++) = 1.0;
        if (row.sense == LinearProgram::Sense::ge) t.at(i, sc++) = -1.0;
        t.rhs(i) = row.rhs;
    }
    for (std::size_t q = 0; q < ub_vars.size(); ++q) {
        int i = r0 + static_cast<int>(q);
        t.at(i, ub_vars[q]) = 1.0;
        t.at(i, sc++) = 1.0;
        t.rhs(i) = lp.upper[ub_vars[q]];
    }
    for (int i = 0; i < m; ++i) {
        if (t.rhs(i) < 0.0) {
            sign[i] = -1.0;
            for (int j = 0; j <= n; ++j) t.at(i, j) = -t.at(i, j);
        }
        t.at(i, art0 + i) = 1.0;
        t.basis()[i] = art0 + i;
    }

    // phase 1: minimise the sum of artificials
    auto& d = t.d();
    std::fill(d.begin(), d.end(), 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= n; ++j)
            if (j < art0 || j == n) d[j] -= t.at(i, j);

    LpSolution sol;
    std::vector<char> allowed(n, 1);
    int it = 0;
    auto res = t.run(allowed, it, max_iterations);
    sol.iterations = it;
    if (res == Tableau::Result::limit) {
        sol.status = LpSolution::Status::iteration_limit;
        return sol;
    }
    if (-d[n] > 1e-7 * std::max(1.0, static_cast<double>(m))) {
        sol.status = LpSolution::Status::infeasible;
        return sol;
    }
    // drive remaining artificials out of the basis
    for (int i = 0; i < m; ++i) {
        if (t.basis()[i] < art0) continue;
        int c = -1;
        for (int j = 0; j < art0; ++j)
            if (std::fabs(t.at(i, j)) > 1e-7) {
                c = j;
                break;
            }
        if (c >= 0) t.pivot(i, c);
    }
    for (int j = art0; j < n; ++j) allowed[j] = 0;

    // phase 2
    std::fill(d.begin(), d.end(), 0.0);
    for (int j = 0; j < n0; ++j) d[j] = lp.cost[j];
    for (int i = 0; i < m; ++i) {
        int b = t.basis()[i];
        double cb = b < n0 ? lp.cost[b] : 0.0;
        if (cb == 0.0) continue;
        for (int j = 0; j <= n; ++j) d[j] -= cb * t.at(i, j);
    }
    res = t.run(allowed, it, max_iterations);
    sol.iterations = it;
    if (res == Tableau::Result::limit) {
        sol.status = LpSolution::Status::iteration_limit;
        return sol;
    }
    if (res == Tableau::Result::unbounded) {
        sol.status = LpSolution::Status::unbounded;
        return sol;
    }

    sol.status = LpSolution::Status::optimal;
    sol.x.assign(n0, 0.0);
    for (int i = 0; i < m; ++i) {
        int b = t.basis()[i];
        if (b < n0) sol.x[b] = std::max(0.0, t.rhs(i));
    }
    sol.objective = 0.0;
    for (int j = 0; j < n0; ++j) sol.objective += lp.cost[j] * sol.x[j];
    sol.row_dual.assign(r0, 0.0);
    for (int i = 0; i < r0; ++i) sol.row_dual[i] = -d[art0 + i] * sign[i];
    sol.reduced_cost.assign(n0, 0.0);
    for (int j = 0; j < n0; ++j) sol.reduced_cost[j] = lp.cost[j];
    for (int i = 0; i < r0; ++i)
        for (auto [j, v] : lp.rows[i].terms) sol.reduced_cost[j] -= v * sol.row_dual[i];
    return sol;
}

double complementary_slackness_residual(const LinearProgram& lp, const LpSolution& sol) {
    double worst = 0.0;
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        const auto& row = lp.rows[i];
        double ax = 0.0;
        for (auto [j, v] : row.terms) ax += v * sol.x[j];
        double r = ax - row.rhs;
        double y = sol.row_dual[i];
        switch (row.sense) {
            case LinearProgram::Sense::eq:
                worst = std::max(worst, std::fabs(r));
                break;
            case LinearProgram::Sense::le:
                worst = std::max({worst, std::max(0.0, r), std::max(0.0, y), std::fabs(y * r)});
                break;
            case LinearProgram::Sense::ge:
                worst = std::max({worst, std::max(0.0, -r), std::max(0.0, -y), std::fabs(y * r)});
                break;
        }
    }
    for (std::size_t j = 0; j < lp.cost.size(); ++j) {
        double x = sol.x[j], u = lp.upper[j], rc = sol.reduced_cost[j];
        worst = std::max({worst, std::max(0.0, -x), std::isfinite(u) ? std::max(0.0, x - u) : 0.0});
        if (rc > 0.0) worst = std::max(worst, rc * x);
        if (rc < 0.0) worst = std::max(worst, std::isfinite(u) ? -rc * (u - x) : -rc);
    }
    return worst;
}

}  // namespace eths
