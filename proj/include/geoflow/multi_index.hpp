#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "geoflow/errors.hpp"

namespace geoflow {

/// Differentiation order carried through the whole engine. Bach needs two
/// covariant derivatives of Cotton, i.e. fourth derivatives of the metric.
inline constexpr int kMaxOrder = 4;

/// Chart dimensions are small (n <= 6 keeps dense jets cache-resident).
inline constexpr int kMaxDim = 6;

/// Exponent vector of a partial derivative, |alpha| <= kMaxOrder.
class MultiIndex {
public:
    MultiIndex() = default;

    MultiIndex(std::initializer_list<int> exponents) {
        if (exponents.size() == 0 || exponents.size() > static_cast<std::size_t>(kMaxDim))
            throw evaluation_error("MultiIndex: dimension must be in [1, 6]");
        dim_ = static_cast<std::uint8_t>(exponents.size());
        int i = 0;
        for (int e : exponents) {
            if (e < 0 || e > kMaxOrder)
                throw evaluation_error("MultiIndex: exponent out of range");
            e_[i++] = static_cast<std::uint8_t>(e);
        }
        if (order() > kMaxOrder)
            throw evaluation_error("MultiIndex: total order exceeds 4");
    }

    static MultiIndex zero(int dim) {
        MultiIndex m;
        m.dim_ = check_dim(dim);
        return m;
    }

    static MultiIndex unit(int dim, int var) {
        MultiIndex m = zero(dim);
        if (var < 0 || var >= dim)
            throw evaluation_error("MultiIndex: variable index out of range");
        m.e_[var] = 1;
        return m;
    }

    static MultiIndex from_exponents(int dim, std::span<const int> e) {
        MultiIndex m = zero(dim);
        for (int i = 0; i < dim; ++i) m.e_[i] = static_cast<std::uint8_t>(e[i]);
        return m;
    }

    int dim() const { return dim_; }

    int order() const {
        int s = 0;
        for (int i = 0; i < dim_; ++i) s += e_[i];
        return s;
    }

    int operator[](int i) const { return e_[i]; }

    /// alpha! as a double (orders <= 4, so exact).
    double factorial() const {
        static constexpr double f[] = {1.0, 1.0, 2.0, 6.0, 24.0};
        double r = 1.0;
        for (int i = 0; i < dim_; ++i) r *= f[e_[i]];
        return r;
    }

    bool operator==(const MultiIndex& o) const {
        if (dim_ != o.dim_) return false;
        for (int i = 0; i < dim_; ++i)
            if (e_[i] != o.e_[i]) return false;
        return true;
    }

private:
    friend struct JetLayout;

    static std::uint8_t check_dim(int dim) {
        if (dim < 1 || dim > kMaxDim)
            throw evaluation_error("MultiIndex: dimension must be in [1, 6]");
        return static_cast<std::uint8_t>(dim);
    }

    std::array<std::uint8_t, kMaxDim> e_{};
    std::uint8_t dim_ = 0;
};

/// Enumeration tables for dense jets in a fixed dimension and truncation
/// order. Multi-indices are listed by total degree, lexicographically within
/// each degree, so the layout of order K is a prefix of the layout of order
/// K+1 and slot ranks are order-independent.
struct JetLayout {
    int dim = 0;
    int order = 0;
    int size = 0;
    std::vector<MultiIndex> index;        // slot -> multi-index
    std::vector<double> fact;             // slot -> alpha!
    std::array<int, kMaxOrder + 2> degree_end{};  // slots of degree <= d are [0, degree_end[d])
    std::vector<std::int32_t> prod;       // [i*size + j] -> slot of alpha+beta, -1 on overflow
    std::vector<std::int32_t> up;         // [v*size + j] -> slot of alpha+e_v, -1 on overflow
    std::vector<std::int32_t> rank_of_key;  // base-5 exponent key -> slot

    int rank(const MultiIndex& m) const {
        int key = 0, p = 1;
        for (int i = 0; i < dim; ++i) {
            key += m[i] * p;
            p *= kMaxOrder + 1;
        }
        const int r = rank_of_key[key];
        if (r < 0)
            throw evaluation_error("multi-index order exceeds jet truncation order");
        return r;
    }
};

namespace detail {

inline JetLayout make_layout(int dim, int order) {
    JetLayout L;
    L.dim = dim;
    L.order = order;

    // enumerate by degree, lexicographically (descending exponent tuples)
    std::array<int, kMaxDim> e{};
    auto emit = [&] {
        MultiIndex m = MultiIndex::from_exponents(dim, std::span<const int>(e.data(), dim));
        L.index.push_back(m);
        L.fact.push_back(m.factorial());
    };
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == dim - 1) {
            e[pos] = remaining;
            emit();
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            e[pos] = k;
            self(self, pos + 1, remaining - k);
        }
    };
    for (int d = 0; d <= order; ++d) {
        rec(rec, 0, d);
        L.degree_end[d] = static_cast<int>(L.index.size());
    }
    L.degree_end[order + 1] = static_cast<int>(L.index.size());
    L.size = static_cast<int>(L.index.size());

    int keys = 1;
    for (int i = 0; i < dim; ++i) keys *= kMaxOrder + 1;
    L.rank_of_key.assign(keys, -1);
    for (int s = 0; s < L.size; ++s) {
        int key = 0, p = 1;
        for (int i = 0; i < dim; ++i) {
            key += L.index[s][i] * p;
            p *= kMaxOrder + 1;
        }
        L.rank_of_key[key] = s;
    }

    auto rank_or_minus1 = [&](const std::array<int, kMaxDim>& exps, int deg) -> std::int32_t {
        if (deg > order) return -1;
        int key = 0, p = 1;
        for (int i = 0; i < dim; ++i) {
            key += exps[i] * p;
            p *= kMaxOrder + 1;
        }
        return L.rank_of_key[key];
    };

    L.prod.assign(static_cast<std::size_t>(L.size) * L.size, -1);
    for (int a = 0; a < L.size; ++a) {
        const int da = L.index[a].order();
        for (int b = 0; b < L.size; ++b) {
            const int db = L.index[b].order();
            if (da + db > order) continue;
            std::array<int, kMaxDim> s{};
            for (int i = 0; i < dim; ++i) s[i] = L.index[a][i] + L.index[b][i];
            L.prod[static_cast<std::size_t>(a) * L.size + b] = rank_or_minus1(s, da + db);
        }
    }

    L.up.assign(static_cast<std::size_t>(dim) * L.size, -1);
    for (int v = 0; v < dim; ++v) {
        for (int s = 0; s < L.size; ++s) {
            std::array<int, kMaxDim> t{};
            for (int i = 0; i < dim; ++i) t[i] = L.index[s][i];
            t[v] += 1;
            L.up[static_cast<std::size_t>(v) * L.size + s] =
                rank_or_minus1(t, L.index[s].order() + 1);
        }
    }
    return L;
}

}  // namespace detail

/// Shared immutable layout for (dim, order); built once, thread-safe.
inline const JetLayout& jet_layout(int dim, int order) {
    if (dim < 1 || dim > kMaxDim)
        throw evaluation_error("jet dimension must be in [1, 6]");
    if (order < 0 || order > kMaxOrder)
        throw evaluation_error("jet order must be in [0, 4]");
    static const auto tables = [] {
        std::vector<JetLayout> t;
        t.reserve(kMaxDim * (kMaxOrder + 1));
        for (int d = 1; d <= kMaxDim; ++d)
            for (int k = 0; k <= kMaxOrder; ++k) t.push_back(detail::make_layout(d, k));
        return t;
    }();
    return tables[(dim - 1) * (kMaxOrder + 1) + order];
}

/// C(dim + order, order): dense coefficient count.
inline int jet_basis_size(int dim, int order) { return jet_layout(dim, order).size; }

}  // namespace geoflow
