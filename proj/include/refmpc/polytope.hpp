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
#ifndef REFMPC_POLYTOPE_HPP
#define REFMPC_POLYTOPE_HPP

#include <vector>

#include "refmpc/core.hpp"

namespace refmpc {

/// Axis-aligned box with possibly unbounded coordinates.
struct Box {
    Vector lo;
    Vector hi;

    Box() = default;
    Box(Vector l, Vector h) : lo(std::move(l)), hi(std::move(h)) {}

    static Box unbounded(int dim) {
        return Box(Vector::Constant(dim, -kInf), Vector::Constant(dim, kInf));
    }

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Vector& v, double tol = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (v(i) < lo(i) - tol || v(i) > hi(i) + tol) return false;
        return true;
    }

    bool bounded(int i) const { return std::isfinite(lo(i)) && std::isfinite(hi(i)); }

    double width(int i) const { return hi(i) - lo(i); }

    Vector center() const {
        Vector c(dim());
        for (int i = 0; i < dim(); ++i) {
            if (bounded(i)) c(i) = 0.5 * (lo(i) + hi(i));
            else if (std::isfinite(lo(i))) c(i) = lo(i) + 1.0;
            else if (std::isfinite(hi(i))) c(i) = hi(i) - 1.0;
            else c(i) = 0.0;
        }
        return c;
    }

    Vector clamp(const Vector& v) const {
        return v.cwiseMax(lo).cwiseMin(hi);
    }

    /// Inflate every bounded coordinate by `frac` of its width (at least `abs_min`).
    Box inflated(double frac, double abs_min = 0.0) const {
        Box b = *this;
        for (int i = 0; i < dim(); ++i) {
            if (!bounded(i)) continue;
            double d = std::max(frac * width(i), abs_min);
            b.lo(i) -= d;
            b.hi(i) += d;
        }
        return b;
    }

    /// Minkowski sum with another box of the same dimension.
    Box plus(const Box& other) const {
        return Box(lo + other.lo, hi + other.hi);
    }

    /// Enumerate the 2^k vertices over the bounded coordinates listed in
    /// `dims`; other coordinates are fixed at `base`.
    std::vector<Vector> vertices_over(const std::vector<int>& dims, const Vector& base) const {
        std::vector<Vector> out;
        const std::size_t count = std::size_t{1} << dims.size();
        out.reserve(count);
        for (std::size_t mask = 0; mask < count; ++mask) {
            Vector v = base;
            for (std::size_t b = 0; b < dims.size(); ++b)
                v(dims[b]) = (mask >> b) & 1 ? hi(dims[b]) : lo(dims[b]);
            out.push_back(std::move(v));
        }
        return out;
    }

    /// All 2^dim vertices (requires every coordinate bounded).
    std::vector<Vector> vertices() const {
        std::vector<int> dims(dim());
        for (int i = 0; i < dim(); ++i) dims[i] = i;
        return vertices_over(dims, center());
    }
};

/// Polytope {z : L z <= l}.
struct Polytope {
    Matrix L;
    Vector l;

    Polytope() = default;
    Polytope(Matrix Lm, Vector lv) : L(std::move(Lm)), l(std::move(lv)) {}

    int rows() const { return static_cast<int>(l.size()); }
    int dim() const { return static_cast<int>(L.cols()); }

    bool contains(const Vector& z, double tol = 0.0) const {
        if (rows() == 0) return true;
        return ((L * z - l).array() <= tol).all();
    }

    /// Worst signed violation; <= 0 means inside.
    double violation(const Vector& z) const {
        if (rows() == 0) return -kInf;
        return (L * z - l).maxCoeff();
    }

    /// Row form of a box: one row per finite bound.
    static Polytope from_box(const Box& box) {
        std::vector<std::pair<int, double>> entries;  // (signed dim+1, bound)
        for (int i = 0; i < box.dim(); ++i) {
            if (std::isfinite(box.hi(i))) entries.push_back({i + 1, box.hi(i)});
            if (std::isfinite(box.lo(i))) entries.push_back({-(i + 1), -box.lo(i)});
        }
        Matrix L = Matrix::Zero(static_cast<int>(entries.size()), box.dim());
        Vector l(static_cast<int>(entries.size()));
        for (int r = 0; r < static_cast<int>(entries.size()); ++r) {
            int d = entries[r].first;
            L(r, std::abs(d) - 1) = d > 0 ? 1.0 : -1.0;
            l(r) = entries[r].second;
        }
        return Polytope(std::move(L), std::move(l));
    }
};

}  // namespace refmpc

#endif  // REFMPC_POLYTOPE_HPP
