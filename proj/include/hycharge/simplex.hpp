#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hycharge {

/// Small dense LP: minimize cost . x + constant over x >= 0 subject to the
/// listed rows. Sized for dispatch problems of a few hundred variables.
struct LinearProgram {
    enum class Rel { LessEq, GreaterEq, Equal };
    struct Row {
        std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
        Rel rel = Rel::LessEq;
        double rhs = 0.0;
    };

    int num_vars = 0;
    std::vector<double> cost;
    double cost_constant = 0.0;
    std::vector<Row> rows;
    std::vector<std::string> var_names;  // optional, for dumps

    int add_var(double c, std::string name = {}) {
        cost.push_back(c);
        var_names.push_back(std::move(name));
        return num_vars++;
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    std::vector<double> x;
    double objective = 0.0;
};

namespace detail {

// Tableau layout: rows 0..m-1 are constraints (rhs in the last column),
// row m holds the reduced costs. Bland's rule everywhere for anti-cycling.
class SimplexTableau {
public:
    static constexpr double kEps = 1e-9;

    SimplexTableau(const LinearProgram& lp) : lp_(lp) {
        const int m = static_cast<int>(lp.rows.size());
        n_struct_ = lp.num_vars;
        // one slack/surplus per inequality, artificials assigned after
        int n_slack = 0;
        for (const auto& row : lp.rows)
            if (row.rel != LinearProgram::Rel::Equal) ++n_slack;
        n_total_ = n_struct_ + n_slack;
        std::vector<double> rhs(m);
        std::vector<int> slack_col(m, -1);
        std::vector<int> sign(m, 1);
        {
            int next_slack = n_struct_;
            for (int r = 0; r < m; ++r) {
                rhs[r] = lp.rows[r].rhs;
                sign[r] = 1;
                auto rel = lp.rows[r].rel;
                if (rhs[r] < 0.0) {  // normalize to nonnegative rhs
                    sign[r] = -1;
                    rhs[r] = -rhs[r];
                    if (rel == LinearProgram::Rel::LessEq)
                        rel = LinearProgram::Rel::GreaterEq;
                    else if (rel == LinearProgram::Rel::GreaterEq)
                        rel = LinearProgram::Rel::LessEq;
                }
                rel_.push_back(rel);
                if (rel != LinearProgram::Rel::Equal) slack_col[r] = next_slack++;
            }
        }
        // artificials for >= and = rows
        art_start_ = n_total_;
        for (int r = 0; r < m; ++r)
            if (rel_[r] != LinearProgram::Rel::LessEq) ++n_total_;

        tab_.assign(m + 1, std::vector<double>(n_total_ + 1, 0.0));
        basis_.assign(m, -1);
        int next_art = art_start_;
        for (int r = 0; r < m; ++r) {
            for (const auto& [var, coeff] : lp_.rows[r].terms)
                tab_[r][var] += sign[r] * coeff;
            tab_[r][n_total_] = rhs[r];
            if (rel_[r] == LinearProgram::Rel::LessEq) {
                tab_[r][slack_col[r]] = 1.0;
                basis_[r] = slack_col[r];
            } else {
                if (rel_[r] == LinearProgram::Rel::GreaterEq) tab_[r][slack_col[r]] = -1.0;
                tab_[r][next_art] = 1.0;
                basis_[r] = next_art;
                ++next_art;
            }
        }
    }

    LpSolution solve() {
        const int m = static_cast<int>(basis_.size());
        if (art_start_ < n_total_) {
            // phase 1: minimize the artificial sum
            auto& obj = tab_[m];
            std::fill(obj.begin(), obj.end(), 0.0);
            for (int c = art_start_; c < n_total_; ++c) obj[c] = 1.0;
            for (int r = 0; r < m; ++r)
                if (basis_[r] >= art_start_) reduce_objective(r);
            if (!pivot_loop(n_total_)) throw std::logic_error("simplex: phase 1 unbounded");
            if (tab_[m][n_total_] < -kEps * 10) {
                LpSolution s;
                s.status = LpStatus::Infeasible;
                return s;
            }
            drive_out_artificials();
        }
        // phase 2: real objective, artificial columns frozen
        auto& obj = tab_[m];
        std::fill(obj.begin(), obj.end(), 0.0);
        for (int c = 0; c < n_struct_; ++c) obj[c] = lp_.cost[c];
        for (int r = 0; r < m; ++r)
            if (std::abs(obj_coeff(basis_[r])) > 0.0) reduce_objective(r);
        if (!pivot_loop(art_start_)) {
            LpSolution s;
            s.status = LpStatus::Unbounded;
            return s;
        }
        LpSolution s;
        s.status = LpStatus::Optimal;
        s.x.assign(n_struct_, 0.0);
        for (int r = 0; r < m; ++r)
            if (basis_[r] < n_struct_) s.x[basis_[r]] = tab_[r][n_total_];
        s.objective = lp_.cost_constant;
        for (int c = 0; c < n_struct_; ++c) s.objective += lp_.cost[c] * s.x[c];
        return s;
    }

private:
    double obj_coeff(int col) const {
        return col < n_struct_ ? lp_.cost[col] : 0.0;
    }

    void reduce_objective(int row) {
        const int m = static_cast<int>(basis_.size());
        const double factor = tab_[m][basis_[row]];
        if (factor == 0.0) return;
        for (int c = 0; c <= n_total_; ++c) tab_[m][c] -= factor * tab_[row][c];
    }

    void pivot(int row, int col) {
        const int m = static_cast<int>(basis_.size());
        const double p = tab_[row][col];
        for (int c = 0; c <= n_total_; ++c) tab_[row][c] /= p;
        for (int r = 0; r <= m; ++r) {
            if (r == row) continue;
            const double f = tab_[r][col];
            if (f == 0.0) continue;
            for (int c = 0; c <= n_total_; ++c) tab_[r][c] -= f * tab_[row][c];
        }
        basis_[row] = col;
    }

    // Bland's rule: lowest eligible entering column, lowest basis index on
    // ratio ties. Returns false on unboundedness.
    bool pivot_loop(int col_limit) {
        const int m = static_cast<int>(basis_.size());
        for (;;) {
            int enter = -1;
            for (int c = 0; c < col_limit; ++c) {
                if (tab_[m][c] < -kEps) {
                    enter = c;
                    break;
                }
            }
            if (enter < 0) return true;
            int leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (int r = 0; r < m; ++r) {
                if (tab_[r][enter] > kEps) {
                    const double ratio = tab_[r][n_total_] / tab_[r][enter];
                    if (leave < 0 || ratio < best_ratio - kEps) {
                        best_ratio = ratio;
                        leave = r;
                    } else if (ratio <= best_ratio + kEps && basis_[r] < basis_[leave]) {
                        leave = r;
                    }
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }

    void drive_out_artificials() {
        const int m = static_cast<int>(basis_.size());
        for (int r = 0; r < m; ++r) {
            if (basis_[r] < art_start_) continue;
            int col = -1;
            for (int c = 0; c < art_start_; ++c) {
                if (std::abs(tab_[r][c]) > kEps) {
                    col = c;
                    break;
                }
            }
            if (col >= 0) pivot(r, col);
            // all-zero row: redundant constraint, artificial stays basic at 0
        }
    }

    const LinearProgram& lp_;
    int n_struct_ = 0;
    int n_total_ = 0;
    int art_start_ = 0;
    std::vector<LinearProgram::Rel> rel_;
    std::vector<std::vector<double>> tab_;
    std::vector<int> basis_;
};

} // namespace detail

inline LpSolution simplex_solve(const LinearProgram& lp) {
    detail::SimplexTableau tableau(lp);
    return tableau.solve();
}

/// Human-readable LP-format dump for external cross-checking.
inline std::string lp_to_text(const LinearProgram& lp) {
    auto var_name = [&](int v) {
        if (v < static_cast<int>(lp.var_names.size()) && !lp.var_names[v].empty())
            return lp.var_names[v];
        return std::string("x") + std::to_string(v);
    };
    char buf[64];
    std::string out = "Minimize\n obj:";
    for (int v = 0; v < lp.num_vars; ++v) {
        std::snprintf(buf, sizeof(buf), " %+.9g %s", lp.cost[v], var_name(v).c_str());
        out += buf;
    }
    if (lp.cost_constant != 0.0) {
        std::snprintf(buf, sizeof(buf), " %+.9g", lp.cost_constant);
        out += buf;
    }
    out += "\nSubject To\n";
    for (std::size_t r = 0; r < lp.rows.size(); ++r) {
        out += " c" + std::to_string(r) + ":";
        for (const auto& [var, coeff] : lp.rows[r].terms) {
            std::snprintf(buf, sizeof(buf), " %+.9g %s", coeff, var_name(var).c_str());
            out += buf;
        }
        const char* rel = lp.rows[r].rel == LinearProgram::Rel::LessEq    ? "<="
                          : lp.rows[r].rel == LinearProgram::Rel::GreaterEq ? ">="
                                                                            : "=";
        std::snprintf(buf, sizeof(buf), " %s %.9g\n", rel, lp.rows[r].rhs);
        out += buf;
    }
    out += "Bounds\n";
    for (int v = 0; v < lp.num_vars; ++v) out += " 0 <= " + var_name(v) + "\n";
    out += "End\n";
    return out;
}

} // namespace hycharge
