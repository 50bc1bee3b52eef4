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
#ifndef REFMPC_CORE_HPP
#define REFMPC_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace refmpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when a state, input or parameter contains NaN/Inf.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown on malformed configuration or inconsistent dimensions.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a matrix expected to be positive definite is not.
class NotPositiveDefiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw NonFiniteError(std::string("non-finite ") + what);
}

/// Symmetrize in place; cheap guard against drift from floating-point noise.
inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double min_eigenvalue(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// Symmetric inverse square root. Throws if the matrix is not PD.
inline Matrix inverse_sqrt_pd(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
    const Vector& ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0)
        throw NotPositiveDefiniteError("matrix is not positive definite");
    Vector inv_sqrt = ev.array().sqrt().inverse();
    return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

/// Symmetric square root of a PSD matrix.
inline Matrix sqrt_psd(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
    Vector ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.array().sqrt().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

// ---------------------------------------------------------------------------
// Deterministic RNG. Counter-based construction keeps sampling results
// independent of thread partitioning: stream(seed, i) is the generator for
// the i-th sample regardless of which worker draws it.
// ---------------------------------------------------------------------------

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return (next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (pinned, unlike std distributions).
    double normal() {
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    Vector normal_vector(int n) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = normal();
        return v;
    }

    /// Uniform direction on the unit sphere in R^n.
    Vector sphere_direction(int n) {
        Vector v = normal_vector(n);
        double nrm = v.norm();
        while (nrm < 1e-12) {
            v = normal_vector(n);
            nrm = v.norm();
        }
        return v / nrm;
    }

    /// Uniform sample in the unit ball in R^n.
    Vector ball(int n) {
        Vector dir = sphere_direction(n);
        return std::pow(uniform(), 1.0 / n) * dir;
    }

    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 mix(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
        mix.next();
        return mix;
    }

private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Logging: stderr, gated by REFMPC_LOG (quiet|info|debug, default info).
// ---------------------------------------------------------------------------

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* env = std::getenv("REFMPC_LOG");
        if (!env) return LogLevel::Info;
        std::string s(env);
        if (s == "quiet" || s == "0") return LogLevel::Quiet;
        if (s == "debug" || s == "2") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return lvl;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::fputs((msg + "\n").c_str(), stderr);
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::fputs((msg + "\n").c_str(), stderr);
}

}  // namespace refmpc

#endif  // REFMPC_CORE_HPP
