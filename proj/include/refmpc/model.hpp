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
#ifndef REFMPC_MODEL_HPP
#define REFMPC_MODEL_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "refmpc/core.hpp"
#include "refmpc/polytope.hpp"

namespace refmpc {

enum class TimeDomain { Discrete, Continuous };
enum class IntegratorKind { Euler, RK4, ExactDiscrete };

inline std::string to_string(TimeDomain d) {
    return d == TimeDomain::Discrete ? "discrete" : "continuous";
}

namespace detail {

/// Jacobians of one explicit RK4 step of dx/dt = f(x, u), chained through the
/// integrator stages.
template <typename F, typename J>
std::pair<Matrix, Matrix> rk4_step_jacobians(const F& f, const J& jacfn, double h,
                                             const Vector& x, const Vector& u) {
    const int n = static_cast<int>(x.size());
    const Matrix I = Matrix::Identity(n, n);
    Vector k1 = f(x, u);
    Vector x2 = x + 0.5 * h * k1;
    Vector k2 = f(x2, u);
    Vector x3 = x + 0.5 * h * k2;
    Vector k3 = f(x3, u);
    Vector x4 = x + h * k3;

    auto [A1, B1] = jacfn(x, u);
    auto [A2, B2] = jacfn(x2, u);
    auto [A3, B3] = jacfn(x3, u);
    auto [A4, B4] = jacfn(x4, u);

    Matrix dk1x = A1, dk1u = B1;
    Matrix dk2x = A2 * (I + 0.5 * h * dk1x);
    Matrix dk2u = A2 * (0.5 * h * dk1u) + B2;
    Matrix dk3x = A3 * (I + 0.5 * h * dk2x);
    Matrix dk3u = A3 * (0.5 * h * dk2u) + B3;
    Matrix dk4x = A4 * (I + h * dk3x);
    Matrix dk4u = A4 * (h * dk3u) + B4;

    Matrix Ad = I + (h / 6.0) * (dk1x + 2.0 * dk2x + 2.0 * dk3x + dk4x);
    Matrix Bd = (h / 6.0) * (dk1u + 2.0 * dk2u + 2.0 * dk3u + dk4u);
    return {Ad, Bd};
}

}  // namespace detail

/// Affine Jacobian parameterization A(r) = A0 + sum_j theta_j(r) A_j,
/// B(r) likewise. One instance per time domain the model supports.
struct LPVParameterization {
    int p = 0;
    std::function<Vector(const Vector& xr, const Vector& ur)> theta;
    std::vector<Matrix> A_basis;  ///< p+1 matrices, index 0 is the constant part
    std::vector<Matrix> B_basis;
    /// d theta / d x and d theta / d u, used by continuous-domain synthesis.
    std::function<Matrix(const Vector&, const Vector&)> theta_jac_x;
    std::function<Matrix(const Vector&, const Vector&)> theta_jac_u;
    bool input_dependent = false;  ///< theta varies with u_r
    std::vector<std::string> names;

    Matrix A_of(const Vector& th) const {
        Matrix A = A_basis[0];
        for (int j = 0; j < p; ++j) A += th(j) * A_basis[j + 1];
        return A;
    }
    Matrix B_of(const Vector& th) const {
        Matrix B = B_basis[0];
        for (int j = 0; j < p; ++j) B += th(j) * B_basis[j + 1];
        return B;
    }
};

/// Which reference coordinates a synthesis grid enumerates. Coordinates not
/// listed are pinned at the center of the reference box. Inputs listed in
/// `vertex_input_dims` enter the matrix inequalities affinely, so only their
/// interval endpoints are enumerated.
struct GridMeta {
    std::vector<int> grid_state_dims;
    std::vector<int> grid_input_dims;
    std::vector<int> vertex_input_dims;
    bool successor_input_gridded = false;  ///< grid u_r+ as well (theta input-dependent)
};

/// Constrained nonlinear system with quasi-LPV Jacobian parameterizations.
///
/// The dynamics are given either as a continuous-time vector field (then a
/// zero-order-hold integrator defines the discrete map) or directly as a
/// discrete map. All evaluation methods are const and safe to call
/// concurrently.
class QuasiLPVModel {
public:
    std::string name;
    int n = 0;
    int m = 0;

    TimeDomain native_domain = TimeDomain::Continuous;
    IntegratorKind integrator = IntegratorKind::RK4;
    double h = 0.01;

    /// Vector field (native continuous) or one-step map (native discrete).
    std::function<Vector(const Vector&, const Vector&)> f;
    /// Analytic Jacobians of `f`; finite differences are used when absent.
    std::function<std::pair<Matrix, Matrix>(const Vector&, const Vector&)> jac;

    Box z_box;        ///< constraint box on (x, u)
    Box zr_box;       ///< reference box, strictly inside z_box
    Box sampling_box; ///< bounded stand-in for zr_box where it is unbounded
    Polytope z_extra; ///< additional polytope rows on (x, u), may be empty

    std::optional<LPVParameterization> lpv_discrete;
    std::optional<LPVParameterization> lpv_continuous;
    GridMeta grid_discrete;
    GridMeta grid_continuous;
    std::vector<int> theta_state_dims;  ///< state coords the parameters depend on
    std::vector<int> theta_input_dims;  ///< input coords the parameters depend on

    double du_max = kInf;     ///< optional incremental bound on u_r(t+1)-u_r(t)
    double u_dot_max = kInf;  ///< reference input rate bound (continuous domain)

    // -- basic splitting helpers ---------------------------------------------

    Vector ref_x(const Vector& r) const { return r.head(n); }
    Vector ref_u(const Vector& r) const { return r.tail(m); }
    Vector make_ref(const Vector& x, const Vector& u) const {
        Vector r(n + m);
        r << x, u;
        return r;
    }

    /// Full constraint polytope rows on (x, u).
    Polytope constraint_rows() const {
        Polytope box_rows = Polytope::from_box(z_box);
        if (z_extra.rows() == 0) return box_rows;
        Matrix L(box_rows.rows() + z_extra.rows(), n + m);
        Vector l(box_rows.rows() + z_extra.rows());
        L << box_rows.L, z_extra.L;
        l << box_rows.l, z_extra.l;
        return Polytope(std::move(L), std::move(l));
    }

    // -- dynamics ------------------------------------------------------------

    Vector vector_field(const Vector& x, const Vector& u) const {
        if (native_domain != TimeDomain::Continuous)
            throw ConfigError(name + ": no continuous-time dynamics");
        return f(x, u);
    }

    /// One step of the configured discrete map.
    Vector step(const Vector& x, const Vector& u) const {
        require_finite(x, "state");
        require_finite(u, "input");
        if (native_domain == TimeDomain::Discrete) return f(x, u);
        switch (integrator) {
            case IntegratorKind::Euler:
                return x + h * f(x, u);
            case IntegratorKind::RK4: {
                Vector k1 = f(x, u);
                Vector k2 = f(x + 0.5 * h * k1, u);
                Vector k3 = f(x + 0.5 * h * k2, u);
                Vector k4 = f(x + h * k3, u);
                return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            case IntegratorKind::ExactDiscrete:
                throw ConfigError(name + ": exact-discrete integrator on continuous dynamics");
        }
        throw ConfigError("unreachable");
    }

    /// Jacobians of the native dynamics function (analytic or central
    /// finite differences with step max(1e-6, 1e-8*||r||)).
    std::pair<Matrix, Matrix> native_jacobians(const Vector& x, const Vector& u) const {
        if (jac) return jac(x, u);
        Vector r = make_ref(x, u);
        const double eps = std::max(1e-6, 1e-8 * r.norm());
        Matrix A(n, n), B(n, m);
        for (int j = 0; j < n; ++j) {
            Vector xp = x, xm = x;
            xp(j) += eps;
            xm(j) -= eps;
            A.col(j) = (f(xp, u) - f(xm, u)) / (2.0 * eps);
        }
        for (int j = 0; j < m; ++j) {
            Vector up = u, um = u;
            up(j) += eps;
            um(j) -= eps;
            B.col(j) = (f(x, up) - f(x, um)) / (2.0 * eps);
        }
        return {A, B};
    }

    std::pair<Matrix, Matrix> continuous_jacobians(const Vector& x, const Vector& u) const {
        if (native_domain != TimeDomain::Continuous)
            throw ConfigError(name + ": continuous Jacobians of a discrete-native model");
        return native_jacobians(x, u);
    }

    /// Jacobians of the discrete one-step map, obtained by chaining the
    /// sensitivities through the integrator stages.
    std::pair<Matrix, Matrix> discrete_jacobians(const Vector& x, const Vector& u) const {
        if (native_domain == TimeDomain::Discrete) return native_jacobians(x, u);
        const Matrix I = Matrix::Identity(n, n);
        switch (integrator) {
            case IntegratorKind::Euler: {
                auto [A, B] = native_jacobians(x, u);
                return {I + h * A, h * B};
            }
            case IntegratorKind::RK4:
                return detail::rk4_step_jacobians(
                    f, [this](const Vector& xs, const Vector& us) {
                        return native_jacobians(xs, us);
                    },
                    h, x, u);
            case IntegratorKind::ExactDiscrete:
                throw ConfigError(name + ": exact-discrete integrator on continuous dynamics");
        }
        throw ConfigError("unreachable");
    }

    /// Jacobians in the requested synthesis domain.
    std::pair<Matrix, Matrix> jacobians(const Vector& r, TimeDomain domain) const {
        require_finite(r, "reference");
        return domain == TimeDomain::Discrete ? discrete_jacobians(ref_x(r), ref_u(r))
                                              : continuous_jacobians(ref_x(r), ref_u(r));
    }

    const LPVParameterization& lpv(TimeDomain domain) const {
        const auto& opt = domain == TimeDomain::Discrete ? lpv_discrete : lpv_continuous;
        if (!opt) throw ConfigError(name + ": no " + to_string(domain) + " parameterization");
        return *opt;
    }

    bool has_lpv(TimeDomain domain) const {
        return domain == TimeDomain::Discrete ? lpv_discrete.has_value()
                                              : lpv_continuous.has_value();
    }

    Vector theta(const Vector& r, TimeDomain domain) const {
        const auto& par = lpv(domain);
        if (par.p == 0) return Vector(0);
        return par.theta(ref_x(r), ref_u(r));
    }

    const GridMeta& grid_meta(TimeDomain domain) const {
        return domain == TimeDomain::Discrete ? grid_discrete : grid_continuous;
    }

    /// Parameter velocity d theta/dt along an admissible reference derivative
    /// (x_dot = f(x_r, u_r), u_dot given). Continuous domain only.
    Vector theta_rate(const Vector& r, const Vector& u_dot) const {
        const auto& par = lpv(TimeDomain::Continuous);
        if (par.p == 0) return Vector(0);
        if (!par.theta_jac_x)
            throw ConfigError(name + ": parameter gradients unavailable");
        Vector x = ref_x(r), u = ref_u(r);
        Vector rate = par.theta_jac_x(x, u) * vector_field(x, u);
        if (par.input_dependent) {
            if (!par.theta_jac_u)
                throw ConfigError(name + ": parameter input-gradients unavailable");
            rate += par.theta_jac_u(x, u) * u_dot;
        }
        return rate;
    }
};

// ---------------------------------------------------------------------------
// Reference trajectories
// ---------------------------------------------------------------------------

/// Extra per-step constraint rows expressed in the tracking-error frame:
/// L_err * ((x,u) - r(t)) <= b. Used for corridor-style path constraints that
/// follow the reference.
struct ErrorFrameRows {
    Matrix L;
    Vector b;
    int rows() const { return static_cast<int>(b.size()); }
};

struct ReferenceTrajectory {
    std::vector<Vector> points;  ///< r(t) = (x_r(t), u_r(t))
    bool periodic = false;
    TimeDomain domain = TimeDomain::Discrete;
    std::optional<ErrorFrameRows> error_rows;

    int length() const { return static_cast<int>(points.size()); }
    int period() const { return length(); }

    /// Reference at time t; periodic trajectories wrap, aperiodic ones hold
    /// the final point.
    const Vector& at(int t) const {
        if (points.empty()) throw ConfigError("empty reference trajectory");
        if (periodic) {
            int T = length();
            return points[((t % T) + T) % T];
        }
        if (t < 0) return points.front();
        return points[std::min(t, length() - 1)];
    }
};

struct ReferenceValidation {
    bool admissible = true;
    double max_defect = 0.0;
    double max_membership_violation = -kInf;
    int first_bad_index = -1;
    std::vector<int> violating_indices;
};

/// Per-step membership and dynamics-defect check of a reference trajectory.
inline ReferenceValidation validate_reference(const QuasiLPVModel& model,
                                              const ReferenceTrajectory& traj,
                                              double defect_tol = 1e-9,
                                              double member_tol = 1e-12) {
    ReferenceValidation rep;
    if (model.native_domain == TimeDomain::Continuous) {
        // Sampled continuous trajectories carry the integrator defect.
        defect_tol = std::max(defect_tol, 1e-7);
    }
    const int T = traj.length();
    for (int t = 0; t < T; ++t) {
        const Vector& r = traj.points[t];
        bool bad = false;
        double viol = model.zr_box.contains(r) ? -1.0 : [&] {
            double v = -kInf;
            for (int i = 0; i < r.size(); ++i) {
                v = std::max(v, model.zr_box.lo(i) - r(i));
                v = std::max(v, r(i) - model.zr_box.hi(i));
            }
            return v;
        }();
        rep.max_membership_violation = std::max(rep.max_membership_violation, viol);
        if (viol > member_tol) bad = true;

        const bool has_next = traj.periodic || t + 1 < T;
        if (has_next) {
            const Vector& rn = traj.at(t + 1);
            Vector pred = model.step(model.ref_x(r), model.ref_u(r));
            double defect = (model.ref_x(rn) - pred).lpNorm<Eigen::Infinity>();
            rep.max_defect = std::max(rep.max_defect, defect);
            if (defect > defect_tol) bad = true;
            if (std::isfinite(model.du_max)) {
                double du = (model.ref_u(rn) - model.ref_u(r)).lpNorm<Eigen::Infinity>();
                if (du > model.du_max + 1e-12) bad = true;
            }
        }
        if (bad) {
            rep.admissible = false;
            if (rep.first_bad_index < 0) rep.first_bad_index = t;
            rep.violating_indices.push_back(t);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Parameter hyperboxes
// ---------------------------------------------------------------------------

struct HyperboxSpec {
    int points_per_dim = 50;
    int successor_points = 50;
    double inflation = 0.01;        ///< fraction of box width added on each side
    /// The one-step box converges slowly in the grid density because the
    /// admissibility filter cuts the sample set at the box boundary, so it
    /// gets a larger safety margin.
    double omega_inflation = 0.08;
};

namespace detail {

/// Iterate a regular grid over the listed (dim, lo, hi) axes; cb receives the
/// full reference vector with non-listed coordinates left at `base`.
struct Axis {
    int dim;
    double lo, hi;
    int count;
};

template <typename Fn>
void for_each_grid_point(const std::vector<Axis>& axes, const Vector& base, Fn&& cb) {
    const int k = static_cast<int>(axes.size());
    std::vector<int> idx(k, 0);
    Vector pt = base;
    while (true) {
        for (int a = 0; a < k; ++a) {
            const Axis& ax = axes[a];
            double t = ax.count > 1 ? static_cast<double>(idx[a]) / (ax.count - 1) : 0.5;
            pt(ax.dim) = ax.lo + t * (ax.hi - ax.lo);
        }
        cb(pt);
        int a = 0;
        for (; a < k; ++a) {
            if (++idx[a] < axes[a].count) break;
            idx[a] = 0;
        }
        if (a == k) break;
    }
    if (k == 0) cb(base);
}

inline std::vector<Axis> theta_axes(const QuasiLPVModel& model, int points) {
    std::vector<Axis> axes;
    for (int d : model.theta_state_dims)
        axes.push_back({d, model.sampling_box.lo(d), model.sampling_box.hi(d), points});
    for (int d : model.theta_input_dims) {
        int dim = model.n + d;
        axes.push_back({dim, model.sampling_box.lo(dim), model.sampling_box.hi(dim), points});
    }
    return axes;
}

}  // namespace detail

/// Hyperboxes covering the parameter range over the reference set and, when
/// `one_step` is set, the one-step parameter change (discrete domain) or the
/// parameter rate (continuous domain). Computed by dense sampling with an
/// inflation margin.
inline std::pair<Box, Box> hyperbox_bounds(const QuasiLPVModel& model, TimeDomain domain,
                                           bool one_step = true,
                                           const HyperboxSpec& spec = {}) {
    const auto& par = model.lpv(domain);
    const int p = par.p;
    if (p == 0) return {Box(Vector(0), Vector(0)), Box(Vector(0), Vector(0))};

    Vector th_lo = Vector::Constant(p, kInf), th_hi = Vector::Constant(p, -kInf);
    Vector dth_lo = Vector::Constant(p, kInf), dth_hi = Vector::Constant(p, -kInf);
    bool any = false, any_step = false;

    auto axes = detail::theta_axes(model, spec.points_per_dim);
    const Vector base = model.sampling_box.center();

    detail::for_each_grid_point(axes, base, [&](const Vector& r) {
        Vector th = model.theta(r, domain);
        th_lo = th_lo.cwiseMin(th);
        th_hi = th_hi.cwiseMax(th);
        any = true;
        if (!one_step) return;

        if (domain == TimeDomain::Discrete) {
            Vector xp = model.step(model.ref_x(r), model.ref_u(r));
            // successor admissibility: state must stay in the reference box
            for (int i = 0; i < model.n; ++i) {
                if (xp(i) < model.sampling_box.lo(i) - 1e-12 ||
                    xp(i) > model.sampling_box.hi(i) + 1e-12)
                    return;
            }
            auto eval_succ = [&](const Vector& up) {
                Vector rp = model.make_ref(xp, up);
                Vector dth = model.theta(rp, domain) - th;
                dth_lo = dth_lo.cwiseMin(dth);
                dth_hi = dth_hi.cwiseMax(dth);
                any_step = true;
            };
            if (par.input_dependent) {
                std::vector<detail::Axis> u_axes;
                for (int d = 0; d < model.m; ++d)
                    u_axes.push_back({d, model.sampling_box.lo(model.n + d),
                                      model.sampling_box.hi(model.n + d),
                                      spec.successor_points});
                Vector u0 = model.ref_u(r);
                detail::for_each_grid_point(u_axes, u0, eval_succ);
            } else {
                eval_succ(model.ref_u(r));
            }
        } else {
            auto eval_rate = [&](const Vector& u_dot) {
                Vector rate = model.theta_rate(r, u_dot);
                dth_lo = dth_lo.cwiseMin(rate);
                dth_hi = dth_hi.cwiseMax(rate);
                any_step = true;
            };
            if (par.input_dependent && std::isfinite(model.u_dot_max)) {
                Box udot(Vector::Constant(model.m, -model.u_dot_max),
                         Vector::Constant(model.m, model.u_dot_max));
                for (const Vector& v : udot.vertices()) eval_rate(v);
            } else {
                eval_rate(Vector::Zero(model.m));
            }
        }
    });

    if (!any) throw ConfigError("empty feasible reference set");
    Box theta_box(th_lo, th_hi);
    theta_box = theta_box.inflated(spec.inflation);
    Box omega_box;
    if (one_step) {
        if (!any_step) throw ConfigError("no admissible successor found while bounding parameters");
        omega_box = Box(dth_lo, dth_hi).inflated(spec.omega_inflation);
    } else {
        omega_box = Box(Vector::Zero(p), Vector::Zero(p));
    }
    return {theta_box, omega_box};
}

// ---------------------------------------------------------------------------
// Model registry
// ---------------------------------------------------------------------------

using ModelFactory =
    std::function<QuasiLPVModel(const std::map<std::string, double>& overrides)>;

inline std::map<std::string, ModelFactory>& model_registry() {
    static std::map<std::string, ModelFactory> reg;
    return reg;
}

inline void register_model(const std::string& name, ModelFactory factory) {
    model_registry()[name] = std::move(factory);
}

inline QuasiLPVModel make_model(const std::string& name,
                                const std::map<std::string, double>& overrides = {}) {
    auto it = model_registry().find(name);
    if (it == model_registry().end())
        throw ConfigError("unknown model '" + name + "'");
    return it->second(overrides);
}

}  // namespace refmpc

#endif  // REFMPC_MODEL_HPP
