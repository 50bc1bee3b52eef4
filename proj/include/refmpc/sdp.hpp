/*
 Copyright 2026 refmpc contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef REFMPC_SDP_HPP
#define REFMPC_SDP_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "refmpc/core.hpp"

namespace refmpc {

// ---------------------------------------------------------------------------
// Problem description: symmetric / rectangular matrix variables and affine
// symmetric-matrix-valued constraint blocks required PSD. The objective is
// either pure feasibility or maximize log det of one symmetric variable.
// ---------------------------------------------------------------------------

struct VarId {
    int index = -1;
    bool valid() const { return index >= 0; }
};

enum class SDStatus { Optimal, Feasible, Infeasible, MaxIter, NumericalFailure };

inline std::string to_string(SDStatus s) {
    switch (s) {
        case SDStatus::Optimal: return "Optimal";
        case SDStatus::Feasible: return "Feasible";
        case SDStatus::Infeasible: return "Infeasible";
        case SDStatus::MaxIter: return "MaxIter";
        case SDStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

struct SDSettings {
    double tol_psd = 1e-8;
    double gap_tol = 1e-7;      ///< absolute target for mu * (total block dim)
    int max_iterations = 200;   ///< Newton iteration budget per phase
    double mu_initial = 1.0;
    double mu_factor = 0.15;
    double mu_floor = 1e-10;
    double newton_tol = 1e-9;
    double infeas_threshold = 1e-9;  ///< phase-1 slack below this => infeasible
    bool verbose = false;
};

class SDProblem {
public:
    struct Variable {
        std::string name;
        bool symmetric = true;
        int rows = 0, cols = 0;
        int offset = 0;  ///< first scalar index
        int size() const { return symmetric ? rows * (rows + 1) / 2 : rows * cols; }
    };

    struct Entry {
        std::uint16_t i, j;  // i <= j
        double v;
    };

    struct Block {
        int dim = 0;
        Matrix F0;
        std::vector<int> vars;             ///< sorted scalar variable indices
        std::vector<int> starts;           ///< vars.size()+1 offsets into entries
        std::vector<Entry> entries;
        std::string label;
    };

    VarId add_symmetric(const std::string& name, int dim) {
        Variable v{name, true, dim, dim, num_scalars_};
        num_scalars_ += v.size();
        vars_.push_back(v);
        return VarId{static_cast<int>(vars_.size()) - 1};
    }

    VarId add_rectangular(const std::string& name, int rows, int cols) {
        Variable v{name, false, rows, cols, num_scalars_};
        num_scalars_ += v.size();
        vars_.push_back(v);
        return VarId{static_cast<int>(vars_.size()) - 1};
    }

    /// Maximize log det of this symmetric variable (else pure feasibility).
    void set_logdet_objective(VarId v) { objective_var_ = v; }

    int scalar_count() const { return num_scalars_; }
    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    VarId objective_var() const { return objective_var_; }

    const Variable& variable(VarId id) const { return vars_.at(id.index); }

    /// Pack a matrix value into the scalar vector.
    void set_value(Vector& y, VarId id, const Matrix& val) const {
        const Variable& v = vars_.at(id.index);
        int k = v.offset;
        if (v.symmetric) {
            for (int i = 0; i < v.rows; ++i)
                for (int j = i; j < v.cols; ++j) y(k++) = 0.5 * (val(i, j) + val(j, i));
        } else {
            for (int i = 0; i < v.rows; ++i)
                for (int j = 0; j < v.cols; ++j) y(k++) = val(i, j);
        }
    }

    Matrix value_of(const Vector& y, VarId id) const {
        const Variable& v = vars_.at(id.index);
        Matrix out(v.rows, v.cols);
        int k = v.offset;
        if (v.symmetric) {
            for (int i = 0; i < v.rows; ++i)
                for (int j = i; j < v.cols; ++j) {
                    out(i, j) = y(k);
                    out(j, i) = y(k);
                    ++k;
                }
        } else {
            for (int i = 0; i < v.rows; ++i)
                for (int j = 0; j < v.cols; ++j) out(i, j) = y(k++);
        }
        return out;
    }

    /// Evaluate one block at y.
    Matrix assemble(const Vector& y, const Block& b) const {
        Matrix M = b.F0;
        for (std::size_t vi = 0; vi < b.vars.size(); ++vi) {
            const double yv = y(b.vars[vi]);
            if (yv == 0.0) continue;
            for (int e = b.starts[vi]; e < b.starts[vi + 1]; ++e) {
                const Entry& en = b.entries[e];
                M(en.i, en.j) += yv * en.v;
                if (en.i != en.j) M(en.j, en.i) += yv * en.v;
            }
        }
        return M;
    }

    // -- block construction ---------------------------------------------------

    /// Incremental builder for one symmetric PSD block. Terms are accumulated
    /// densely per scalar variable, then compressed on finish().
    class BlockBuilder {
    public:
        BlockBuilder(SDProblem& prob, int dim, std::string label = {})
            : prob_(prob), dim_(dim) {
            block_.dim = dim;
            block_.F0 = Matrix::Zero(dim, dim);
            block_.label = std::move(label);
        }

        void add_constant(const Matrix& C, int r0 = 0, int c0 = 0) {
            place(block_.F0, C, r0, c0);
        }

        /// block += s * (pad(M * V * N, r0, c0) + its transpose), where V is
        /// the matrix variable `id`. Covers diagonal placements (use s/2 with
        /// r0 == c0 and symmetric product) and mirrored off-diagonal entries.
        void add_pair(VarId id, const Matrix& M, const Matrix& N, double s, int r0, int c0) {
            const Variable& v = prob_.vars_.at(id.index);
            if (M.cols() != v.rows || N.rows() != v.cols)
                throw ConfigError("add_pair: dimension mismatch for " + v.name);
            int k = v.offset;
            if (v.symmetric) {
                for (int i = 0; i < v.rows; ++i)
                    for (int j = i; j < v.cols; ++j, ++k) {
                        Matrix C = M.col(i) * N.row(j);
                        if (i != j) C += M.col(j) * N.row(i);
                        accumulate(k, s, C, r0, c0);
                    }
            } else {
                for (int i = 0; i < v.rows; ++i)
                    for (int j = 0; j < v.cols; ++j, ++k) {
                        Matrix C = M.col(i) * N.row(j);
                        accumulate(k, s, C, r0, c0);
                    }
            }
        }

        /// block += s * y * (pad(C, r0, c0) + pad(C, r0, c0)') for a scalar
        /// (1x1) variable with coefficient matrix C.
        void add_scalar_pair(VarId id, const Matrix& C, double s, int r0, int c0) {
            const Variable& v = prob_.vars_.at(id.index);
            if (v.size() != 1) throw ConfigError("add_scalar_pair: variable is not scalar");
            accumulate(v.offset, s, C, r0, c0);
        }

        /// Convenience: s * V placed symmetrically at diagonal offset r0.
        void add_identity_term(VarId id, double s, int r0) {
            const Variable& v = prob_.vars_.at(id.index);
            Matrix I = Matrix::Identity(v.rows, v.rows);
            add_pair(id, I, I, 0.5 * s, r0, r0);
        }

        /// Finish, optionally negating (for blocks stated as <= 0).
        void finish(bool negate = false) {
            if (negate) {
                block_.F0 = -block_.F0;
                for (auto& [d, C] : coeffs_) C = -C;
            }
            block_.F0 = symmetrized(block_.F0);
            for (auto& [d, C] : coeffs_) {
                Matrix S = symmetrized(C);
                double scale = S.cwiseAbs().maxCoeff();
                if (scale < 1e-300) continue;
                block_.vars.push_back(d);
                block_.starts.push_back(static_cast<int>(block_.entries.size()));
                for (int i = 0; i < dim_; ++i)
                    for (int j = i; j < dim_; ++j)
                        if (std::abs(S(i, j)) > 1e-14 * scale)
                            block_.entries.push_back(
                                {static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                                 S(i, j)});
            }
            block_.starts.push_back(static_cast<int>(block_.entries.size()));
            prob_.blocks_.push_back(std::move(block_));
        }

    private:
        static void place(Matrix& dst, const Matrix& C, int r0, int c0) {
            dst.block(r0, c0, C.rows(), C.cols()) += C;
            // mirror, excluding the overlap when placed on the diagonal
            for (int i = 0; i < C.rows(); ++i)
                for (int j = 0; j < C.cols(); ++j)
                    if (r0 + i != c0 + j) dst(c0 + j, r0 + i) += C(i, j);
                    else dst(r0 + i, c0 + j) += C(i, j);
            dst.block(r0, c0, C.rows(), C.cols()) -= C;  // undo double add
        }

        void accumulate(int scalar_idx, double s, const Matrix& C, int r0, int c0) {
            auto it = coeffs_.find(scalar_idx);
            if (it == coeffs_.end())
                it = coeffs_.emplace(scalar_idx, Matrix::Zero(dim_, dim_)).first;
            Matrix& F = it->second;
            for (int i = 0; i < C.rows(); ++i)
                for (int j = 0; j < C.cols(); ++j) {
                    F(r0 + i, c0 + j) += s * C(i, j);
                    F(c0 + j, r0 + i) += s * C(i, j);
                }
        }

        SDProblem& prob_;
        int dim_;
        Block block_;
        std::map<int, Matrix> coeffs_;
    };

    BlockBuilder block(int dim, std::string label = {}) {
        return BlockBuilder(*this, dim, std::move(label));
    }

private:
    std::vector<Variable> vars_;
    std::vector<Block> blocks_;
    VarId objective_var_{};
    int num_scalars_ = 0;

    friend class BlockBuilder;
};

struct SDSolution {
    SDStatus status = SDStatus::NumericalFailure;
    Vector y;
    double objective = std::numeric_limits<double>::quiet_NaN();  ///< log det X_min
    double worst_margin = -kInf;  ///< min over blocks of lambda_min at solution
    double gap = kInf;            ///< final barrier gap (mu * total dim)
    int iterations = 0;
    std::string message;
};

// ---------------------------------------------------------------------------
// Solver: interior-point path following on the log-det barrier. Phase one
// maximizes the uniform slack t with blocks B(y) - t I to find a strictly
// feasible point (or certify that none exists at desk tolerance); phase two
// follows the central path of  -log det X_min - mu * sum_b log det B_b(y).
// ---------------------------------------------------------------------------

class SDSolver {
public:
    explicit SDSolver(const SDProblem& problem, SDSettings settings = {})
        : prob_(problem), set_(settings) {}

    SDSolution solve(const Vector* initial = nullptr) {
        const int D = prob_.scalar_count();
        Vector y = initial ? *initial : Vector::Zero(D);
        if (!y.allFinite()) y.setZero();

        SDSolution sol;
        sol.y = y;
        total_dim_ = 0;
        for (const auto& b : prob_.blocks()) total_dim_ += b.dim;

        // ---- phase one ----
        double t = 0.0;
        if (!phase_one(y, t, sol)) return sol;

        // ---- phase two ----
        if (!prob_.objective_var().valid()) {
            sol.status = SDStatus::Feasible;
            sol.y = y;
            sol.worst_margin = worst_margin(y);
            sol.gap = 0.0;
            return sol;
        }
        phase_two(y, sol);
        return sol;
    }

private:
    using Block = SDProblem::Block;

    double total_dim_ = 0;

    double worst_margin(const Vector& y) const {
        double w = kInf;
        for (const auto& b : prob_.blocks())
            w = std::min(w, min_eigenvalue(prob_.assemble(y, b)));
        return w;
    }

    /// Barrier value of -sum log det(B_b(y) - t I); +inf if any block fails.
    bool barrier_value(const Vector& y, double t, double& val) const {
        val = 0.0;
        for (const auto& b : prob_.blocks()) {
            Matrix M = prob_.assemble(y, b);
            if (t != 0.0) M.diagonal().array() -= t;
            Eigen::LLT<Matrix> llt(M);
            if (llt.info() != Eigen::Success) return false;
            double ld = 0.0;
            for (int i = 0; i < b.dim; ++i) ld += std::log(llt.matrixL()(i, i));
            val -= 2.0 * ld;
        }
        return true;
    }

    /// Gradient/Hessian contribution of -w * log det(B(y) - t I) for one
    /// block. `ti` is the index of the synthetic slack variable (or -1).
    bool accumulate_block(const Block& b, const Vector& y, double t, double w, int ti,
                          Vector& g, Matrix& H) const {
        Matrix M = prob_.assemble(y, b);
        if (t != 0.0) M.diagonal().array() -= t;
        Eigen::LLT<Matrix> llt(M);
        if (llt.info() != Eigen::Success) return false;
        Matrix S = llt.solve(Matrix::Identity(b.dim, b.dim));

        const int nv = static_cast<int>(b.vars.size());
        std::vector<Matrix> Fd(nv);
        std::vector<Matrix> Td(nv);
        for (int d = 0; d < nv; ++d) {
            Matrix F = Matrix::Zero(b.dim, b.dim);
            for (int e = b.starts[d]; e < b.starts[d + 1]; ++e) {
                F(b.entries[e].i, b.entries[e].j) = b.entries[e].v;
                F(b.entries[e].j, b.entries[e].i) = b.entries[e].v;
            }
            Fd[d] = F;
            Td[d] = S * F * S;
            g(b.vars[d]) -= w * (S.cwiseProduct(F)).sum();
        }
        for (int d = 0; d < nv; ++d) {
            const Matrix& T = Td[d];
            for (int e = 0; e <= d; ++e) {
                double hv = 0.0;
                for (int k = b.starts[e]; k < b.starts[e + 1]; ++k) {
                    const auto& en = b.entries[k];
                    hv += (en.i == en.j ? 1.0 : 2.0) * T(en.i, en.j) * en.v;
                }
                hv *= w;
                H(b.vars[d], b.vars[e]) += hv;
                if (d != e) H(b.vars[e], b.vars[d]) += hv;
            }
        }
        if (ti >= 0) {
            // slack variable coefficient is -I
            g(ti) += w * S.trace();
            Matrix S2 = S * S;
            H(ti, ti) += w * S2.trace();
            for (int d = 0; d < nv; ++d) {
                double hv = -w * (S2.cwiseProduct(Fd[d])).sum();
                H(ti, b.vars[d]) += hv;
                H(b.vars[d], ti) += hv;
            }
        }
        return true;
    }

    /// One centering run of damped Newton on
    ///   f(z) = w_lin' z - mu * sum log det(B_b(y) - t I) [- mu*log(cap - t)]
    /// over z = (y [, t]). Returns false on numerical failure.
    bool center(Vector& y, double* t, double mu, const Vector& w_lin, double t_cap,
                int& iters_left, double* decrement_out = nullptr) {
        const int D = prob_.scalar_count();
        const int dim = t ? D + 1 : D;
        const int ti = t ? D : -1;

        while (iters_left > 0) {
            --iters_left;
            Vector g = w_lin;
            Matrix H = Matrix::Zero(dim, dim);
            bool ok = true;
            for (const auto& b : prob_.blocks()) {
                if (!accumulate_block(b, y, t ? *t : 0.0, mu, ti, g, H)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) return false;
            if (t && std::isfinite(t_cap)) {
                double slack = t_cap - *t;
                if (slack <= 0) return false;
                g(ti) += mu / slack;
                H(ti, ti) += mu / (slack * slack);
            }
            if (obj_active_) {
                if (!accumulate_block(*obj_block_, y, 0.0, 1.0, -1, g, H)) return false;
            }

            double ridge = 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
            Vector step;
            for (int attempt = 0; attempt < 8; ++attempt) {
                Matrix Hr = H;
                Hr.diagonal().array() += ridge;
                Eigen::LDLT<Matrix> ldlt(Hr);
                if (ldlt.info() == Eigen::Success) {
                    step = -ldlt.solve(g);
                    if (step.allFinite()) break;
                }
                ridge *= 100.0;
                step.resize(0);
            }
            if (step.size() == 0) return false;

            double dec = -g.dot(step);
            if (decrement_out) *decrement_out = dec;
            double f0;
            double fb;
            if (!eval_f(y, t, mu, w_lin, t_cap, f0)) return false;
            if (dec <= 2.0 * set_.newton_tol * (1.0 + std::abs(f0))) return true;

            double alpha = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                Vector yn = y + alpha * step.head(D);
                double tn = t ? *t + alpha * step(ti) : 0.0;
                if (eval_f(yn, t ? &tn : nullptr, mu, w_lin, t_cap, fb) &&
                    fb <= f0 - 0.25 * alpha * dec) {
                    y = yn;
                    if (t) *t = tn;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) return true;  // stalled at numerical floor; treat as centered
        }
        return true;
    }

    bool eval_f(const Vector& y, const double* t, double mu, const Vector& w_lin, double t_cap,
                double& out) const {
        double bar;
        if (!barrier_value(y, t ? *t : 0.0, bar)) return false;
        out = mu * bar + w_lin.head(y.size()).dot(y);
        if (t) {
            out += w_lin(w_lin.size() - 1) * (*t);
            if (std::isfinite(t_cap)) {
                double slack = t_cap - *t;
                if (slack <= 0) return false;
                out -= mu * std::log(slack);
            }
        }
        if (obj_active_) {
            Matrix X = prob_.assemble(y, *obj_block_);
            Eigen::LLT<Matrix> llt(X);
            if (llt.info() != Eigen::Success) return false;
            double ld = 0.0;
            for (int i = 0; i < X.rows(); ++i) ld += std::log(llt.matrixL()(i, i));
            out -= 2.0 * ld;
        }
        return true;
    }

    bool phase_one(Vector& y, double& t, SDSolution& sol) {
        const int D = prob_.scalar_count();
        obj_active_ = false;

        double margin0 = worst_margin(y);
        double scale = 1.0;
        for (const auto& b : prob_.blocks())
            scale = std::max(scale, b.F0.cwiseAbs().maxCoeff());
        const double feas_target = 1e-7 * scale;

        if (margin0 > feas_target) return true;  // already strictly feasible

        t = margin0 - 0.1 * std::abs(margin0) - 1e-3 * scale - 1e-6;
        double t_cap = 0.5 * scale + std::abs(t) + 1.0;

        Vector w_lin = Vector::Zero(D + 1);
        w_lin(D) = -1.0;  // maximize t

        int iters = set_.max_iterations;
        double mu = set_.mu_initial * std::max(1.0, std::abs(t));
        double best_t = t;
        while (iters > 0) {
            if (!center(y, &t, mu, w_lin, t_cap, iters)) {
                sol.status = SDStatus::NumericalFailure;
                sol.message = "phase-1 centering failed";
                sol.y = y;
                return false;
            }
            best_t = std::max(best_t, t);
            double actual = worst_margin(y);
            if (actual > feas_target) {
                if (set_.verbose) log_debug("sdp: phase-1 feasible, margin " + std::to_string(actual));
                return true;
            }
            if (mu < set_.mu_floor * std::max(1.0, scale)) break;
            mu *= set_.mu_factor;
        }
        double actual = worst_margin(y);
        if (actual > 0.0) return true;  // feasible, thinly
        sol.status = iters <= 0 && best_t > -set_.infeas_threshold * scale
                         ? SDStatus::MaxIter
                         : SDStatus::Infeasible;
        sol.y = y;
        sol.worst_margin = actual;
        sol.message = "phase-1 slack " + std::to_string(best_t);
        sol.iterations = set_.max_iterations - iters;
        return false;
    }

    void phase_two(Vector& y, SDSolution& sol) {
        const int D = prob_.scalar_count();
        // synthesize the objective "block" X_min >= 0 once
        SDProblem::Block ob;
        {
            const auto& v = prob_.variable(prob_.objective_var());
            ob.dim = v.rows;
            ob.F0 = Matrix::Zero(v.rows, v.rows);
            int k = v.offset;
            for (int i = 0; i < v.rows; ++i)
                for (int j = i; j < v.rows; ++j, ++k) {
                    ob.vars.push_back(k);
                    ob.starts.push_back(static_cast<int>(ob.entries.size()));
                    ob.entries.push_back(
                        {static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j), 1.0});
                }
            ob.starts.push_back(static_cast<int>(ob.entries.size()));
        }
        obj_block_ = &ob;

        // ensure the objective variable starts PD: shift toward a strictly
        // feasible interior value if needed (phase-1 leaves it PSD-ish)
        {
            Matrix X = prob_.assemble(y, ob);
            double lm = min_eigenvalue(X);
            if (lm <= 0) {
                // nudge: X_min has X_min <= X(grid) constraints only, so a
                // small positive diagonal remains feasible if margins allow
                Matrix Xn = X;
                Xn.diagonal().array() += (1e-9 - lm);
                prob_.set_value(y, prob_.objective_var(), Xn);
                if (worst_margin(y) <= 0.0) prob_.set_value(y, prob_.objective_var(), X);
            }
        }

        obj_active_ = true;
        Vector w_lin = Vector::Zero(D);
        double mu = set_.mu_initial;
        int iters = set_.max_iterations;
        double dec = 0.0;
        bool failed = false;
        while (true) {
            if (!center(y, nullptr, mu, w_lin, kInf, iters, &dec)) {
                failed = true;
                break;
            }
            if (mu * total_dim_ <= set_.gap_tol || mu <= set_.mu_floor || iters <= 0) break;
            mu *= set_.mu_factor;
        }
        obj_active_ = false;
        obj_block_ = nullptr;

        sol.y = y;
        sol.iterations = set_.max_iterations - iters;
        sol.gap = mu * total_dim_;
        sol.worst_margin = worst_margin(y);
        Matrix X = prob_.value_of(y, prob_.objective_var());
        Eigen::LLT<Matrix> llt(X);
        if (llt.info() == Eigen::Success) {
            double ld = 0.0;
            for (int i = 0; i < X.rows(); ++i) ld += std::log(llt.matrixL()(i, i));
            sol.objective = 2.0 * ld;
        }
        if (failed && sol.worst_margin < -set_.tol_psd) {
            sol.status = SDStatus::NumericalFailure;
            sol.message = "phase-2 centering failed";
            return;
        }
        if (sol.worst_margin < -set_.tol_psd) {
            sol.status = SDStatus::NumericalFailure;
            sol.message = "final iterate infeasible";
            return;
        }
        if (mu * total_dim_ <= set_.gap_tol)
            sol.status = SDStatus::Optimal;
        else if (iters <= 0)
            sol.status = SDStatus::MaxIter;
        else
            sol.status = SDStatus::Feasible;
    }

    const SDProblem& prob_;
    SDSettings set_;
    const SDProblem::Block* obj_block_ = nullptr;
    bool obj_active_ = false;
};

inline SDSolution solve(const SDProblem& problem, const SDSettings& settings = {},
                        const Vector* initial = nullptr) {
    SDSolver solver(problem, settings);
    return solver.solve(initial);
}

}  // namespace refmpc

#endif  // REFMPC_SDP_HPP
