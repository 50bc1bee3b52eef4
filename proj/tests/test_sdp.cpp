#include <catch2/catch_amalgamated.hpp>

#include "refmpc/sdp.hpp"

using namespace refmpc;

namespace {

/// max log det x s.t. x <= bound, scalar x.
SDSolution solve_scalar_bound(double bound) {
    SDProblem prob;
    VarId x = prob.add_symmetric("x", 1);
    {
        auto b = prob.block(1, "x >= 0");
        b.add_identity_term(x, 1.0, 0);
        b.finish();
    }
    {
        auto b = prob.block(1, "bound - x >= 0");
        b.add_constant(Matrix::Constant(1, 1, bound));
        b.add_identity_term(x, -1.0, 0);
        b.finish();
    }
    prob.set_logdet_objective(x);
    return solve(prob);
}

/// Feasibility of a^2 X - X <= -0.1 X with X > 0, scalar.
SDSolution solve_lyapunov(double a, double scale = 1.0) {
    SDProblem prob;
    VarId x = prob.add_symmetric("X", 1);
    {
        auto b = prob.block(1, "decrease");
        b.add_identity_term(x, scale * (1.0 - a * a - 0.1), 0);
        b.finish();
    }
    {
        auto b = prob.block(1, "X > 0");
        b.add_identity_term(x, scale, 0);
        b.finish();
    }
    return solve(prob);
}

}  // namespace

TEST_CASE("scalar log det with active bound", "[sdp]") {
    SDSolution sol = solve_scalar_bound(2.0);
    REQUIRE(sol.status == SDStatus::Optimal);
    REQUIRE(sol.y(0) == Catch::Approx(2.0).margin(1e-4));
    REQUIRE(sol.worst_margin >= -1e-8);
}

TEST_CASE("discrete Lyapunov feasibility", "[sdp]") {
    SDSolution stable = solve_lyapunov(0.5);
    REQUIRE((stable.status == SDStatus::Feasible || stable.status == SDStatus::Optimal));
    REQUIRE(stable.y(0) > 0.0);

    SDSolution unstable = solve_lyapunov(2.0);
    REQUIRE(unstable.status == SDStatus::Infeasible);
}

TEST_CASE("feasibility status invariant under positive scaling", "[sdp]") {
    for (double a : {0.3, 0.9, 1.5, 2.0}) {
        SDStatus s1 = solve_lyapunov(a, 1.0).status;
        SDStatus s2 = solve_lyapunov(a, 37.5).status;
        bool f1 = s1 == SDStatus::Feasible || s1 == SDStatus::Optimal;
        bool f2 = s2 == SDStatus::Feasible || s2 == SDStatus::Optimal;
        REQUIRE(f1 == f2);
    }
}

TEST_CASE("random problems against grid-search feasibility oracle", "[sdp]") {
    SplitMix64 rng(12345);
    int checked_feasible = 0, checked_infeasible = 0;
    for (int trial = 0; trial < 30; ++trial) {
        SDProblem prob;
        std::vector<VarId> vars;
        for (int v = 0; v < 3; ++v) vars.push_back(prob.add_symmetric("y" + std::to_string(v), 1));

        const int nblocks = 2 + static_cast<int>(rng.next() % 3);
        std::vector<Matrix> F0s;
        std::vector<std::array<Matrix, 3>> coeffs;
        for (int k = 0; k < nblocks; ++k) {
            Matrix F0(2, 2);
            double d0 = rng.uniform(-1.0, 1.0), d1 = rng.uniform(-1.0, 1.0),
                   o = rng.uniform(-0.5, 0.5);
            F0 << d0, o, o, d1;
            std::array<Matrix, 3> C;
            auto b = prob.block(2);
            b.add_constant(F0);
            for (int v = 0; v < 3; ++v) {
                Matrix Cv(2, 2);
                double cd0 = rng.uniform(-1.0, 1.0), cd1 = rng.uniform(-1.0, 1.0),
                       co = rng.uniform(-0.5, 0.5);
                Cv << cd0, co, co, cd1;
                C[v] = Cv;
                b.add_scalar_pair(vars[v], Cv, 0.5, 0, 0);
            }
            b.finish();
            F0s.push_back(F0);
            coeffs.push_back(C);
        }

        auto block_at = [&](const Vector& y, int k) {
            Matrix M = F0s[k];
            for (int v = 0; v < 3; ++v) M += y(v) * coeffs[k][v];
            return M;
        };

        // grid-search oracle over a coarse lattice
        double best_margin = -kInf;
        for (double y0 = -2.0; y0 <= 2.0; y0 += 0.25)
            for (double y1 = -2.0; y1 <= 2.0; y1 += 0.25)
                for (double y2 = -2.0; y2 <= 2.0; y2 += 0.25) {
                    Vector y(3);
                    y << y0, y1, y2;
                    double margin = kInf;
                    for (int k = 0; k < nblocks; ++k)
                        margin = std::min(margin, min_eigenvalue(block_at(y, k)));
                    best_margin = std::max(best_margin, margin);
                }

        SDSolution sol = solve(prob);
        bool solver_feasible =
            sol.status == SDStatus::Feasible || sol.status == SDStatus::Optimal;
        if (best_margin >= 0.05) {
            REQUIRE(solver_feasible);
            ++checked_feasible;
        }
        if (sol.status == SDStatus::Infeasible) {
            REQUIRE(best_margin < 0.05);
            ++checked_infeasible;
        }
        if (solver_feasible) {
            // the returned point must actually satisfy the blocks
            double margin = kInf;
            for (int k = 0; k < nblocks; ++k)
                margin = std::min(margin, min_eigenvalue(block_at(sol.y, k)));
            REQUIRE(margin >= -1e-8);
        }
    }
    REQUIRE(checked_feasible >= 3);
    REQUIRE(checked_infeasible >= 3);
}

TEST_CASE("log det objective respects every imposed bound", "[sdp]") {
    // maximize log det X s.t. X <= C_k for a few random PD bounds
    SplitMix64 rng(7);
    SDProblem prob;
    VarId X = prob.add_symmetric("X", 3);
    std::vector<Matrix> bounds;
    for (int k = 0; k < 4; ++k) {
        Matrix G(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) G(i, j) = rng.normal();
        Matrix C = G * G.transpose() + Matrix::Identity(3, 3);
        bounds.push_back(C);
        auto b = prob.block(3);
        b.add_constant(C);
        b.add_identity_term(X, -1.0, 0);
        b.finish();
    }
    {
        auto b = prob.block(3, "X >= 0");
        b.add_identity_term(X, 1.0, 0);
        b.finish();
    }
    prob.set_logdet_objective(X);
    SDSolution sol = solve(prob);
    REQUIRE(sol.status == SDStatus::Optimal);
    Matrix Xv = prob.value_of(sol.y, X);
    for (const Matrix& C : bounds) REQUIRE(min_eigenvalue(C - Xv) >= -1e-7);
}

TEST_CASE("adding a constraint cannot improve the objective", "[sdp]") {
    Matrix C1(2, 2), C2(2, 2);
    C1 << 3.0, 0.5, 0.5, 2.0;
    C2 << 2.0, -0.3, -0.3, 2.5;

    auto build = [&](bool with_second) {
        SDProblem prob;
        VarId X = prob.add_symmetric("X", 2);
        {
            auto b = prob.block(2);
            b.add_constant(C1);
            b.add_identity_term(X, -1.0, 0);
            b.finish();
        }
        if (with_second) {
            auto b = prob.block(2);
            b.add_constant(C2);
            b.add_identity_term(X, -1.0, 0);
            b.finish();
        }
        {
            auto b = prob.block(2);
            b.add_identity_term(X, 1.0, 0);
            b.finish();
        }
        prob.set_logdet_objective(X);
        return solve(prob);
    };

    SDSolution loose = build(false);
    SDSolution tight = build(true);
    REQUIRE(loose.status == SDStatus::Optimal);
    REQUIRE(tight.status == SDStatus::Optimal);
    REQUIRE(tight.objective <= loose.objective + 1e-5);
}
