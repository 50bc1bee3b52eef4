// Test-only reference implementations, kept independent of the library code
// paths they are used to check.
#ifndef REFMPC_TESTS_SUPPORT_ORACLES_HPP
#define REFMPC_TESTS_SUPPORT_ORACLES_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace oracles {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Adaptive-step Runge-Kutta-Fehlberg 4(5) integration of dx/dt = f(x) over
/// [0, T] with local error control. Independent oracle for fixed-step
/// integrators.
inline Vector integrate_adaptive(const std::function<Vector(const Vector&)>& f, Vector x,
                                 double T, double tol = 1e-11) {
    double t = 0.0;
    double h = std::min(1e-3, T);
    const double safety = 0.9;
    int guard = 0;
    while (t < T) {
        if (++guard > 2000000) throw std::runtime_error("adaptive integrator stalled");
        h = std::min(h, T - t);
        Vector k1 = f(x);
        Vector k2 = f(x + h * (1.0 / 4.0) * k1);
        Vector k3 = f(x + h * ((3.0 / 32.0) * k1 + (9.0 / 32.0) * k2));
        Vector k4 = f(x + h * ((1932.0 / 2197.0) * k1 - (7200.0 / 2197.0) * k2 +
                               (7296.0 / 2197.0) * k3));
        Vector k5 = f(x + h * ((439.0 / 216.0) * k1 - 8.0 * k2 + (3680.0 / 513.0) * k3 -
                               (845.0 / 4104.0) * k4));
        Vector k6 = f(x + h * (-(8.0 / 27.0) * k1 + 2.0 * k2 - (3544.0 / 2565.0) * k3 +
                               (1859.0 / 4104.0) * k4 - (11.0 / 40.0) * k5));
        Vector x4 = x + h * ((25.0 / 216.0) * k1 + (1408.0 / 2565.0) * k3 +
                             (2197.0 / 4104.0) * k4 - (1.0 / 5.0) * k5);
        Vector x5 = x + h * ((16.0 / 135.0) * k1 + (6656.0 / 12825.0) * k3 +
                             (28561.0 / 56430.0) * k4 - (9.0 / 50.0) * k5 + (2.0 / 55.0) * k6);
        double err = (x5 - x4).norm();
        if (err <= tol || h <= 1e-12) {
            t += h;
            x = x5;
        }
        double scale = err > 0 ? safety * std::pow(tol / err, 0.2) : 2.0;
        h *= std::min(2.0, std::max(0.1, scale));
    }
    return x;
}

/// Central finite-difference Jacobians of a vector map g(x, u).
inline std::pair<Matrix, Matrix> fd_jacobians(
    const std::function<Vector(const Vector&, const Vector&)>& g, const Vector& x,
    const Vector& u, double eps = 1e-6) {
    const int n = static_cast<int>(x.size());
    const int m = static_cast<int>(u.size());
    Vector g0 = g(x, u);
    Matrix A(g0.size(), n), B(g0.size(), m);
    for (int j = 0; j < n; ++j) {
        Vector xp = x, xm = x;
        xp(j) += eps;
        xm(j) -= eps;
        A.col(j) = (g(xp, u) - g(xm, u)) / (2.0 * eps);
    }
    for (int j = 0; j < m; ++j) {
        Vector up = u, um = u;
        up(j) += eps;
        um(j) -= eps;
        B.col(j) = (g(x, up) - g(x, um)) / (2.0 * eps);
    }
    return {A, B};
}

/// Stabilizing solution of the discrete algebraic Riccati equation via
/// fixed-point iteration on the Riccati map.
inline Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                         int max_iter = 100000, double tol = 1e-13) {
    Matrix P = Q;
    for (int it = 0; it < max_iter; ++it) {
        Matrix G = (R + B.transpose() * P * B).inverse();
        Matrix Pn = A.transpose() * P * A -
                    A.transpose() * P * B * G * B.transpose() * P * A + Q;
        double diff = (Pn - P).cwiseAbs().maxCoeff() / (1.0 + P.cwiseAbs().maxCoeff());
        P = 0.5 * (Pn + Pn.transpose());
        if (diff < tol) return P;
    }
    throw std::runtime_error("DARE iteration did not converge");
}

inline Matrix dare_gain(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
    Matrix P = solve_dare(A, B, Q, R);
    return (R + B.transpose() * P * B).inverse() * B.transpose() * P * A;
}

/// Stabilizing solution of the continuous algebraic Riccati equation via
/// Kleinman-Newton iteration (each step solves a Lyapunov equation by the
/// Kronecker linear system; sizes here are tiny).
inline Matrix solve_lyapunov_ct(const Matrix& Acl, const Matrix& W) {
    // A' P + P A + W = 0
    const int n = static_cast<int>(Acl.rows());
    Matrix I = Matrix::Identity(n, n);
    Matrix K = Eigen::kroneckerProduct(I, Acl.transpose()).eval() +
               Eigen::kroneckerProduct(Acl.transpose(), I).eval();
    Vector w(Eigen::Map<const Vector>(W.data(), n * n));
    Vector p = K.fullPivLu().solve(-w);
    Matrix P = Eigen::Map<Matrix>(p.data(), n, n);
    return 0.5 * (P + P.transpose());
}

inline Matrix solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                         const Matrix& K0, int max_iter = 200, double tol = 1e-12) {
    Matrix K = K0;
    Matrix P = Matrix::Zero(A.rows(), A.cols());
    for (int it = 0; it < max_iter; ++it) {
        Matrix Acl = A - B * K;
        Matrix W = Q + K.transpose() * R * K;
        Matrix Pn = solve_lyapunov_ct(Acl, W);
        Matrix Kn = R.inverse() * B.transpose() * Pn;
        double diff = (Pn - P).cwiseAbs().maxCoeff() / (1.0 + Pn.cwiseAbs().maxCoeff());
        P = Pn;
        K = Kn;
        if (diff < tol) return P;
    }
    throw std::runtime_error("CARE iteration did not converge");
}

}  // namespace oracles

#endif
