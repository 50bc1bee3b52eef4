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
#ifndef REFMPC_BENCH_MODELS_HPP
#define REFMPC_BENCH_MODELS_HPP

#include <cmath>
#include <map>
#include <string>

#include "refmpc/model.hpp"

namespace refmpc {

namespace detail {

inline double override_or(const std::map<std::string, double>& ov, const std::string& key,
                          double fallback) {
    auto it = ov.find(key);
    return it == ov.end() ? fallback : it->second;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Continuous stirred-tank reactor, three states (reactant, product, waste
// temperature coordinate) and one heat-flux related input.
// ---------------------------------------------------------------------------

inline QuasiLPVModel cstr_model(const std::map<std::string, double>& overrides = {}) {
    QuasiLPVModel mdl;
    mdl.name = "cstr";
    mdl.n = 3;
    mdl.m = 1;
    mdl.native_domain = TimeDomain::Continuous;
    mdl.integrator = IntegratorKind::RK4;
    mdl.h = detail::override_or(overrides, "h", 0.01);

    mdl.f = [](const Vector& x, const Vector& u) {
        const double x1 = x(0), x2 = x(1), x3 = x(2);
        const double e1 = std::exp(-1.0 / x3);
        const double e2 = std::exp(-0.55 / x3);
        Vector dx(3);
        dx(0) = 1.0 - x1 - 1e4 * x1 * x1 * e1 - 400.0 * x1 * e2;
        dx(1) = 1e4 * x1 * x1 * e1 - x2;
        dx(2) = u(0) - x3;
        return dx;
    };
    mdl.jac = [](const Vector& x, const Vector&) {
        const double x1 = x(0), x3 = x(2);
        const double e1 = std::exp(-1.0 / x3);
        const double e2 = std::exp(-0.55 / x3);
        const double th1 = 400.0 * e2;
        const double th2 = 2e4 * x1 * e1;
        const double th3 = 1e4 * (x1 / x3) * (x1 / x3) * e1;
        const double th4 = 400.0 * 0.55 * x1 / (x3 * x3) * e2;
        Matrix A = Matrix::Zero(3, 3);
        A(0, 0) = -1.0 - th2 - th1;
        A(0, 2) = -th3 - th4;
        A(1, 0) = th2;
        A(1, 1) = -1.0;
        A(1, 2) = th3;
        A(2, 2) = -1.0;
        Matrix B = Matrix::Zero(3, 1);
        B(2, 0) = 1.0;
        return std::make_pair(A, B);
    };

    Vector zlo(4), zhi(4), rlo(4), rhi(4);
    zlo << 0.0, 0.0, 0.0, 0.049;
    zhi << 1.0, 1.0, 1.0, 0.449;
    rlo << 0.05, 0.05, 0.05, 0.059;
    rhi << 0.45, 0.15, 0.20, 0.439;
    mdl.z_box = Box(zlo, zhi);
    mdl.zr_box = Box(rlo, rhi);
    mdl.sampling_box = mdl.zr_box;
    mdl.theta_state_dims = {0, 2};
    mdl.theta_input_dims = {0};

    // continuous-domain parameterization: four nonlinear Jacobian terms
    {
        LPVParameterization par;
        par.p = 4;
        par.names = {"400*exp(-0.55/x3)", "2e4*x1*exp(-1/x3)", "1e4*(x1/x3)^2*exp(-1/x3)",
                     "220*x1/x3^2*exp(-0.55/x3)"};
        par.theta = [](const Vector& x, const Vector&) {
            const double x1 = x(0), x3 = x(2);
            const double e1 = std::exp(-1.0 / x3);
            const double e2 = std::exp(-0.55 / x3);
            Vector th(4);
            th << 400.0 * e2, 2e4 * x1 * e1, 1e4 * (x1 / x3) * (x1 / x3) * e1,
                220.0 * x1 / (x3 * x3) * e2;
            return th;
        };
        par.theta_jac_x = [](const Vector& x, const Vector&) {
            const double x1 = x(0), x3 = x(2);
            const double e1 = std::exp(-1.0 / x3);
            const double e2 = std::exp(-0.55 / x3);
            Matrix J = Matrix::Zero(4, 3);
            J(0, 2) = 400.0 * e2 * 0.55 / (x3 * x3);
            J(1, 0) = 2e4 * e1;
            J(1, 2) = 2e4 * x1 * e1 / (x3 * x3);
            J(2, 0) = 2e4 * x1 * e1 / (x3 * x3);
            J(2, 2) = 1e4 * x1 * x1 * e1 * (1.0 / (x3 * x3) - 2.0 / x3) / (x3 * x3);
            J(3, 0) = 220.0 * e2 / (x3 * x3);
            J(3, 2) = 220.0 * x1 * e2 * (0.55 / (x3 * x3) - 2.0 / x3) / (x3 * x3);
            return J;
        };
        par.input_dependent = false;

        Matrix A0 = -Matrix::Identity(3, 3);
        Matrix A1 = Matrix::Zero(3, 3), A2 = Matrix::Zero(3, 3), A3 = Matrix::Zero(3, 3),
               A4 = Matrix::Zero(3, 3);
        A1(0, 0) = -1.0;
        A2(0, 0) = -1.0;
        A2(1, 0) = 1.0;
        A3(0, 2) = -1.0;
        A3(1, 2) = 1.0;
        A4(0, 2) = -1.0;
        Matrix B0 = Matrix::Zero(3, 1);
        B0(2, 0) = 1.0;
        par.A_basis = {A0, A1, A2, A3, A4};
        par.B_basis = {B0, Matrix::Zero(3, 1), Matrix::Zero(3, 1), Matrix::Zero(3, 1),
                       Matrix::Zero(3, 1)};
        mdl.lpv_continuous = std::move(par);
    }

    // discrete-domain parameterization: the six non-constant entries of the
    // one-step Jacobians (the third row and the x2 column stay constant)
    {
        struct Pos {
            bool in_A;
            int i, j;
        };
        static const std::vector<Pos> positions = {{true, 0, 0}, {true, 0, 2},  {true, 1, 0},
                                                   {true, 1, 2}, {false, 0, 0}, {false, 1, 0}};
        QuasiLPVModel probe = mdl;  // copy with dynamics only, no lpv yet
        Vector rc = mdl.zr_box.center();
        auto [Ac, Bc] = probe.discrete_jacobians(rc.head(3), rc.tail(1));
        Matrix A0 = Ac, B0 = Bc;
        std::vector<Matrix> A_basis{A0}, B_basis{B0};
        for (const Pos& pos : positions) {
            Matrix EA = Matrix::Zero(3, 3), EB = Matrix::Zero(3, 1);
            if (pos.in_A) {
                A0(pos.i, pos.j) = 0.0;
                EA(pos.i, pos.j) = 1.0;
            } else {
                B0(pos.i, pos.j) = 0.0;
                EB(pos.i, pos.j) = 1.0;
            }
            A_basis.push_back(EA);
            B_basis.push_back(EB);
        }
        A_basis[0] = A0;
        B_basis[0] = B0;

        LPVParameterization par;
        par.p = 6;
        par.names = {"dA11", "dA13", "dA21", "dA23", "dB1", "dB2"};
        auto dyn = mdl.f;
        auto jac = mdl.jac;
        double h = mdl.h;
        par.theta = [dyn, jac, h](const Vector& x, const Vector& u) {
            auto [A, B] = detail::rk4_step_jacobians(dyn, jac, h, x, u);
            Vector th(6);
            th << A(0, 0), A(0, 2), A(1, 0), A(1, 2), B(0, 0), B(1, 0);
            return th;
        };
        par.input_dependent = true;
        par.A_basis = std::move(A_basis);
        par.B_basis = std::move(B_basis);
        mdl.lpv_discrete = std::move(par);
    }

    mdl.grid_discrete.grid_state_dims = {0, 2};
    mdl.grid_discrete.grid_input_dims = {0};
    mdl.grid_discrete.successor_input_gridded = true;
    mdl.grid_continuous.grid_state_dims = {0, 2};
    mdl.grid_continuous.vertex_input_dims = {0};
    return mdl;
}

// ---------------------------------------------------------------------------
// Kinematic bicycle model of a car: positions, heading, velocity and front
// steering angle; inputs are acceleration and steering rate.
// ---------------------------------------------------------------------------

inline QuasiLPVModel bicycle_model(const std::map<std::string, double>& overrides = {}) {
    constexpr double lf = 1.4;
    constexpr double lr = 1.5;
    constexpr double kb = lr / (lf + lr);

    QuasiLPVModel mdl;
    mdl.name = "bicycle";
    mdl.n = 5;
    mdl.m = 2;
    mdl.native_domain = TimeDomain::Continuous;
    mdl.integrator = IntegratorKind::Euler;
    mdl.h = detail::override_or(overrides, "h", 0.002);

    auto beta_of = [](double delta) { return std::atan(kb * std::tan(delta)); };
    auto dbeta_of = [](double delta) {
        const double T = std::tan(delta);
        const double S = 1.0 + T * T;  // sec^2
        const double D = 1.0 + kb * kb * T * T;
        return kb * S / D;
    };

    mdl.f = [beta_of](const Vector& x, const Vector& u) {
        const double psi = x(2), v = x(3), delta = x(4);
        const double beta = beta_of(delta);
        Vector dx(5);
        dx(0) = v * std::cos(psi + beta);
        dx(1) = v * std::sin(psi + beta);
        dx(2) = v / lr * std::sin(beta);
        dx(3) = u(0);
        dx(4) = u(1);
        return dx;
    };
    mdl.jac = [beta_of, dbeta_of](const Vector& x, const Vector&) {
        const double psi = x(2), v = x(3), delta = x(4);
        const double beta = beta_of(delta);
        const double db = dbeta_of(delta);
        const double w = psi + beta;
        Matrix A = Matrix::Zero(5, 5);
        A(0, 2) = -v * std::sin(w);
        A(0, 3) = std::cos(w);
        A(0, 4) = -v * std::sin(w) * db;
        A(1, 2) = v * std::cos(w);
        A(1, 3) = std::sin(w);
        A(1, 4) = v * std::cos(w) * db;
        A(2, 3) = std::sin(beta) / lr;
        A(2, 4) = v / lr * std::cos(beta) * db;
        Matrix B = Matrix::Zero(5, 2);
        B(3, 0) = 1.0;
        B(4, 1) = 1.0;
        return std::make_pair(A, B);
    };

    Vector zlo(7), zhi(7), rlo(7), rhi(7);
    zlo << -kInf, -kInf, -kInf, 5.0, -0.5, -2.0, -6.0;
    zhi << kInf, kInf, kInf, 55.0, 0.5, 2.0, 6.0;
    rlo << -kInf, -kInf, -kInf, 10.0, -0.4, -1.0, -3.0;
    rhi << kInf, kInf, kInf, 50.0, 0.4, 1.0, 3.0;
    mdl.z_box = Box(zlo, zhi);
    mdl.zr_box = Box(rlo, rhi);
    Vector slo = rlo, shi = rhi;
    slo(0) = -1.0;
    shi(0) = 1.0;
    slo(1) = -1.0;
    shi(1) = 1.0;
    slo(2) = -3.141592653589793;
    shi(2) = 3.141592653589793;
    mdl.sampling_box = Box(slo, shi);
    mdl.theta_state_dims = {2, 3, 4};
    mdl.theta_input_dims = {0, 1};  // parameter rates depend on (a, u_delta)

    auto theta_fn = [beta_of, dbeta_of](const Vector& x, const Vector&) {
        const double psi = x(2), v = x(3), delta = x(4);
        const double beta = beta_of(delta);
        const double db = dbeta_of(delta);
        const double w = psi + beta;
        Vector th(8);
        th << -v * std::sin(w), std::cos(w), -v * std::sin(w) * db, v * std::cos(w),
            std::sin(w), v * std::cos(w) * db, std::sin(beta) / lr,
            v / lr * std::cos(beta) * db;
        return th;
    };

    struct Pos {
        int i, j;
    };
    static const std::vector<Pos> positions = {{0, 2}, {0, 3}, {0, 4}, {1, 2},
                                               {1, 3}, {1, 4}, {2, 3}, {2, 4}};

    // continuous parameterization
    {
        LPVParameterization par;
        par.p = 8;
        par.theta = theta_fn;
        par.input_dependent = false;
        par.A_basis.push_back(Matrix::Zero(5, 5));
        Matrix B0 = Matrix::Zero(5, 2);
        B0(3, 0) = 1.0;
        B0(4, 1) = 1.0;
        par.B_basis.push_back(B0);
        for (const Pos& pos : positions) {
            Matrix E = Matrix::Zero(5, 5);
            E(pos.i, pos.j) = 1.0;
            par.A_basis.push_back(E);
            par.B_basis.push_back(Matrix::Zero(5, 2));
        }
        mdl.lpv_continuous = std::move(par);
    }
    // discrete (Euler) parameterization shares the same parameters
    {
        LPVParameterization par;
        par.p = 8;
        par.theta = theta_fn;
        par.input_dependent = false;
        const double h = mdl.h;
        par.A_basis.push_back(Matrix::Identity(5, 5));
        Matrix B0 = Matrix::Zero(5, 2);
        B0(3, 0) = h;
        B0(4, 1) = h;
        par.B_basis.push_back(B0);
        for (const Pos& pos : positions) {
            Matrix E = Matrix::Zero(5, 5);
            E(pos.i, pos.j) = h;
            par.A_basis.push_back(E);
            par.B_basis.push_back(Matrix::Zero(5, 2));
        }
        mdl.lpv_discrete = std::move(par);
    }

    // the discrete map is affine in the acceleration, so only its interval
    // endpoints are enumerated; the steering rate enters through trig terms
    mdl.grid_discrete.grid_state_dims = {2, 3, 4};
    mdl.grid_discrete.grid_input_dims = {1};
    mdl.grid_discrete.vertex_input_dims = {0};
    mdl.grid_continuous.grid_state_dims = {2, 3, 4};
    mdl.grid_continuous.vertex_input_dims = {0, 1};
    return mdl;
}

// ---------------------------------------------------------------------------
// Small registered systems used by tests and the command line
// ---------------------------------------------------------------------------

/// Controllable double integrator, both time domains, no parameters.
inline QuasiLPVModel double_integrator_model(const std::map<std::string, double>& overrides = {}) {
    QuasiLPVModel mdl;
    mdl.name = "double_integrator";
    mdl.n = 2;
    mdl.m = 1;
    mdl.native_domain = TimeDomain::Continuous;
    mdl.integrator = IntegratorKind::RK4;
    mdl.h = detail::override_or(overrides, "h", 0.1);
    mdl.f = [](const Vector& x, const Vector& u) {
        Vector dx(2);
        dx << x(1), u(0);
        return dx;
    };
    mdl.jac = [](const Vector&, const Vector&) {
        Matrix A = Matrix::Zero(2, 2);
        A(0, 1) = 1.0;
        Matrix B = Matrix::Zero(2, 1);
        B(1, 0) = 1.0;
        return std::make_pair(A, B);
    };
    Vector zlo(3), zhi(3);
    zlo << -5.0, -5.0, -5.0;
    zhi << 5.0, 5.0, 5.0;
    mdl.z_box = Box(zlo, zhi);
    mdl.zr_box = Box(0.9 * zlo, 0.9 * zhi);
    mdl.sampling_box = mdl.zr_box;

    LPVParameterization par;
    par.p = 0;
    par.A_basis = {Matrix()};
    par.B_basis = {Matrix()};
    // constant Jacobians: fill the constant parts from the model itself
    QuasiLPVModel probe = mdl;
    auto [Ad, Bd] = probe.discrete_jacobians(Vector::Zero(2), Vector::Zero(1));
    par.A_basis[0] = Ad;
    par.B_basis[0] = Bd;
    mdl.lpv_discrete = par;
    auto [Ac, Bc] = probe.continuous_jacobians(Vector::Zero(2), Vector::Zero(1));
    par.A_basis[0] = Ac;
    par.B_basis[0] = Bc;
    mdl.lpv_continuous = par;
    return mdl;
}

/// Scalar input-affine nonlinear system; the terminal gain depends on the
/// state reference only.
inline QuasiLPVModel scalar_nl_model(const std::map<std::string, double>& overrides = {}) {
    QuasiLPVModel mdl;
    mdl.name = "scalar_nl";
    mdl.n = 1;
    mdl.m = 1;
    mdl.native_domain = TimeDomain::Discrete;
    mdl.h = 1.0;
    const double step = detail::override_or(overrides, "step", 0.1);
    mdl.f = [step](const Vector& x, const Vector& u) {
        Vector xn(1);
        xn(0) = x(0) + step * (-x(0) + u(0) + 0.3 * x(0) * x(0));
        return xn;
    };
    mdl.jac = [step](const Vector& x, const Vector&) {
        Matrix A(1, 1), B(1, 1);
        A(0, 0) = 1.0 + step * (-1.0 + 0.6 * x(0));
        B(0, 0) = step;
        return std::make_pair(A, B);
    };
    Vector rlo(2), rhi(2), zlo(2), zhi(2);
    rlo << -1.0, -1.5;
    rhi << 1.0, 1.5;
    zlo << -2.0, -2.5;
    zhi << 2.0, 2.5;
    mdl.z_box = Box(zlo, zhi);
    mdl.zr_box = Box(rlo, rhi);
    mdl.sampling_box = mdl.zr_box;
    mdl.theta_state_dims = {0};

    LPVParameterization par;
    par.p = 1;
    par.theta = [](const Vector& x, const Vector&) { return x.head(1); };
    par.theta_jac_x = [](const Vector&, const Vector&) { return Matrix::Identity(1, 1); };
    Matrix A0(1, 1), A1(1, 1), B0(1, 1);
    A0(0, 0) = 1.0 - step;
    A1(0, 0) = 0.6 * step;
    B0(0, 0) = step;
    par.A_basis = {A0, A1};
    par.B_basis = {B0, Matrix::Zero(1, 1)};
    par.input_dependent = false;
    mdl.lpv_discrete = par;
    mdl.grid_discrete.grid_state_dims = {0};
    mdl.grid_discrete.grid_input_dims = {0};
    return mdl;
}

/// Scalar first-order lag whose steady states sweep the whole box; used by
/// the artificial-reference scheme tests.
inline QuasiLPVModel scalar_track_model(const std::map<std::string, double>& overrides = {}) {
    QuasiLPVModel mdl;
    mdl.name = "scalar_track";
    mdl.n = 1;
    mdl.m = 1;
    mdl.native_domain = TimeDomain::Discrete;
    mdl.h = 1.0;
    const double gain = detail::override_or(overrides, "gain", 0.5);
    mdl.f = [gain](const Vector& x, const Vector& u) {
        Vector xn(1);
        xn(0) = x(0) + gain * (u(0) - x(0));
        return xn;
    };
    mdl.jac = [gain](const Vector&, const Vector&) {
        Matrix A(1, 1), B(1, 1);
        A(0, 0) = 1.0 - gain;
        B(0, 0) = gain;
        return std::make_pair(A, B);
    };
    Vector rlo(2), rhi(2), zlo(2), zhi(2);
    rlo << -1.0, -1.0;
    rhi << 1.0, 1.0;
    zlo << -1.2, -1.2;
    zhi << 1.2, 1.2;
    mdl.z_box = Box(zlo, zhi);
    mdl.zr_box = Box(rlo, rhi);
    mdl.sampling_box = mdl.zr_box;

    LPVParameterization par;
    par.p = 0;
    Matrix A0(1, 1), B0(1, 1);
    A0(0, 0) = 1.0 - gain;
    B0(0, 0) = gain;
    par.A_basis = {A0};
    par.B_basis = {B0};
    mdl.lpv_discrete = par;
    return mdl;
}

// ---------------------------------------------------------------------------
// Benchmark references
// ---------------------------------------------------------------------------

/// Reachable periodic orbit: a smooth periodic input profile whose periodic
/// state is root-solved through the period map (the plant is exponentially
/// stable, so fixed-point iteration of the period map converges).
inline ReferenceTrajectory cstr_periodic_reference(const QuasiLPVModel& cstr, int period,
                                                   double u_mean = 0.135,
                                                   double u_amplitude = 0.03) {
    auto input_at = [&](int t) {
        Vector u(1);
        u(0) = u_mean + u_amplitude * std::sin(2.0 * 3.141592653589793 * t / period);
        return u;
    };
    auto period_map = [&](Vector x) {
        for (int t = 0; t < period; ++t) x = cstr.step(x, input_at(t));
        return x;
    };
    Vector x(3);
    x << 0.1, 0.085, u_mean;
    for (int it = 0; it < 200; ++it) {
        Vector xn = period_map(x);
        double diff = (xn - x).lpNorm<Eigen::Infinity>();
        x = xn;
        if (diff < 1e-13) break;
    }
    ReferenceTrajectory traj;
    traj.periodic = true;
    traj.domain = TimeDomain::Discrete;
    traj.points.reserve(period);
    for (int t = 0; t < period; ++t) {
        traj.points.push_back(cstr.make_ref(x, input_at(t)));
        x = cstr.step(x, input_at(t));
    }
    return traj;
}

/// Double lane change at constant speed: a smooth steering-rate profile is
/// shaped so the lateral displacement reaches `lane_width` and back, then the
/// trajectory is generated by forward simulation. A +-0.35 m corridor on the
/// lateral position rides along as error-frame rows.
inline ReferenceTrajectory evasive_reference(const QuasiLPVModel& car, double speed = 20.0,
                                             double lane_width = 3.0,
                                             double corridor = 0.35,
                                             double t_total = 3.2) {
    const double h = car.h;
    const int steps = static_cast<int>(std::llround(t_total / h));

    // one smooth S-shaped steering pulse per lane change: delta(t) follows a
    // scaled sin(2 pi s) bump over [0, T1], which returns heading to zero
    const double T1 = 0.9;
    const double gap = 0.5;
    const double t_first = 0.3;
    const double t_second = t_first + T1 + gap;

    auto delta_profile = [&](double amp, double t) {
        auto bump = [&](double t0) {
            double s = (t - t0) / T1;
            if (s <= 0.0 || s >= 1.0) return 0.0;
            return std::sin(2.0 * 3.141592653589793 * s);
        };
        return amp * (bump(t_first) - bump(t_second));
    };

    auto rollout = [&](double amp, ReferenceTrajectory* out) {
        Vector x(5);
        x << 0.0, 0.0, 0.0, speed, 0.0;
        double last_delta = 0.0;
        double final_y = 0.0;
        for (int t = 0; t < steps; ++t) {
            double dref = delta_profile(amp, t * h);
            Vector u(2);
            u << 0.0, (dref - last_delta) / h;
            Vector xs = x;
            xs(4) = last_delta;
            if (out) out->points.push_back(car.make_ref(xs, u));
            x = car.step(xs, u);
            last_delta = dref;
            final_y = std::max(final_y, x(1));
        }
        return final_y;
    };

    // secant scaling of the steering amplitude to hit the lane width
    double amp = 0.02;
    double y = rollout(amp, nullptr);
    for (int it = 0; it < 25 && std::abs(y - lane_width) > 1e-6; ++it) {
        amp *= lane_width / std::max(y, 1e-9);
        y = rollout(amp, nullptr);
    }

    ReferenceTrajectory traj;
    traj.periodic = false;
    traj.domain = TimeDomain::Discrete;
    rollout(amp, &traj);

    ErrorFrameRows rows;
    rows.L = Matrix::Zero(2, car.n + car.m);
    rows.L(0, 1) = 1.0;
    rows.L(1, 1) = -1.0;
    rows.b = Vector::Constant(2, corridor);
    traj.error_rows = rows;
    return traj;
}

inline bool register_bench_models() {
    register_model("cstr", cstr_model);
    register_model("bicycle", bicycle_model);
    register_model("double_integrator", double_integrator_model);
    register_model("scalar_nl", scalar_nl_model);
    register_model("scalar_track", scalar_track_model);
    return true;
}

namespace detail {
inline const bool bench_models_registered = register_bench_models();
}

}  // namespace refmpc

#endif  // REFMPC_BENCH_MODELS_HPP
