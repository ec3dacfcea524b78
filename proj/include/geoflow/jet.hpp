#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <span>
#include <vector>

#include "geoflow/errors.hpp"
#include "geoflow/multi_index.hpp"

namespace geoflow {

namespace detail {
constexpr int binom(int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<int>(r);
}
}  // namespace detail

/// Truncated multivariate Taylor expansion of one scalar quantity at a fixed
/// chart point. Coefficients are Taylor-normalized (value of d^alpha f divided
/// by alpha!), stored densely in graded-lex slot order, so multiplication is a
/// plain truncated convolution. Storage is inline; no heap traffic.
template <int Order>
class Jet {
    static_assert(Order >= 0 && Order <= kMaxOrder);

public:
    static constexpr int kCapacity = detail::binom(kMaxDim + Order, Order);

    Jet() = default;

    static Jet constant(int dim, double v) {
        Jet j(jet_layout(dim, Order));
        j.c_[0] = v;
        return j;
    }

    /// Jet of the coordinate function x_var at base value x0.
    static Jet variable(int dim, int var, double x0) {
        Jet j(jet_layout(dim, Order));
        if (var < 0 || var >= dim)
            throw evaluation_error("Jet::variable: coordinate index out of range");
        j.c_[0] = x0;
        if constexpr (Order >= 1) j.c_[1 + var] = 1.0;
        return j;
    }

    int dim() const { return lay_ ? lay_->dim : 0; }
    int size() const { return lay_ ? lay_->size : 0; }
    double value() const { return c_[0]; }

    double coeff(int slot) const { return c_[slot]; }
    double& coeff(int slot) { return c_[slot]; }

    double coeff(const MultiIndex& m) const {
        check_index(m);
        return c_[lay_->rank(m)];
    }

    /// The partial derivative d^alpha at the base point (coefficient * alpha!).
    double partial(const MultiIndex& m) const {
        check_index(m);
        return c_[lay_->rank(m)] * m.factorial();
    }

    Jet& operator+=(const Jet& o) {
        check_same(o);
        for (int i = 0; i < size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        check_same(o);
        for (int i = 0; i < size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Jet& operator+=(double s) {
        c_[0] += s;
        return *this;
    }
    Jet& operator-=(double s) {
        c_[0] -= s;
        return *this;
    }
    Jet& operator*=(double s) {
        for (int i = 0; i < size(); ++i) c_[i] *= s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a -= s; }
    friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }

    Jet operator-() const {
        Jet r = *this;
        for (int i = 0; i < size(); ++i) r.c_[i] = -r.c_[i];
        return r;
    }

    /// Truncated Cauchy product; coefficients of total order > Order vanish.
    friend Jet operator*(const Jet& a, const Jet& b) {
        a.check_same(b);
        const JetLayout& L = *a.lay_;
        Jet r(L);
        for (int i = 0; i < L.size; ++i) {
            const double ai = a.c_[i];
            if (ai == 0.0) continue;
            const int da = L.index[i].order();
            const int jend = L.degree_end[Order - da];
            const std::int32_t* row = L.prod.data() + static_cast<std::size_t>(i) * L.size;
            for (int j = 0; j < jend; ++j) r.c_[row[j]] += ai * b.c_[j];
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
    friend Jet operator/(double s, const Jet& b) { return reciprocal(b) * s; }

    /// One derivative consumes one order.
    Jet<(Order > 0 ? Order - 1 : 0)> derivative(int var) const {
        static_assert(Order >= 1, "cannot differentiate an order-0 jet");
        if (var < 0 || var >= dim())
            throw evaluation_error("Jet::derivative: variable index out of range");
        const JetLayout& big = *lay_;
        Jet<Order - 1> r(jet_layout(dim(), Order - 1));
        const std::int32_t* shift = big.up.data() + static_cast<std::size_t>(var) * big.size;
        for (int s = 0; s < r.size(); ++s)
            r.coeff(s) = c_[shift[s]] * (big.index[s][var] + 1);
        return r;
    }

    template <int K2>
    Jet<K2> truncated() const {
        static_assert(K2 <= Order);
        Jet<K2> r(jet_layout(dim(), K2));
        for (int s = 0; s < r.size(); ++s) r.coeff(s) = c_[s];
        return r;
    }

    /// Nilpotent part (constant term dropped).
    Jet nilpotent_part() const {
        Jet r = *this;
        r.c_[0] = 0.0;
        return r;
    }

    bool finite() const {
        for (int i = 0; i < size(); ++i)
            if (!std::isfinite(c_[i])) return false;
        return true;
    }

private:
    template <int K>
    friend class Jet;

    explicit Jet(const JetLayout& lay) : lay_(&lay) { c_.fill(0.0); }

    void check_same(const Jet& o) const {
        if (!lay_ || lay_ != o.lay_)
            throw evaluation_error("jet dimension mismatch");
    }
    void check_index(const MultiIndex& m) const {
        if (!lay_ || m.dim() != dim())
            throw evaluation_error("multi-index does not match jet dimension");
    }

    const JetLayout* lay_ = nullptr;
    std::array<double, kCapacity> c_{};
};

/// Derivative table of a univariate smooth function at a point: value and
/// derivatives f, f', ..., f^(4). The carrier of Faa di Bruno composition.
struct UnivariateTable {
    std::array<double, kMaxOrder + 1> d{};
};

/// Faa di Bruno composition, truncated: with w the nilpotent part of a,
/// f(a) = sum_m f^(m)(a0)/m! w^m, evaluated by Horner in the jet ring.
template <int Order>
Jet<Order> compose(const UnivariateTable& f, const Jet<Order>& a) {
    static constexpr double inv_fact[] = {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
    const Jet<Order> w = a.nilpotent_part();
    Jet<Order> r = Jet<Order>::constant(a.dim(), f.d[Order] * inv_fact[Order]);
    for (int m = Order - 1; m >= 0; --m) {
        r = r * w;
        r += f.d[m] * inv_fact[m];
    }
    return r;
}

namespace detail {

inline void require_positive(double c, const char* fn) {
    if (!(c > 0.0))
        throw evaluation_error(std::string(fn) + ": constant term must be positive, got " +
                               std::to_string(c));
}

}  // namespace detail

template <int K>
Jet<K> exp(const Jet<K>& a) {
    UnivariateTable t;
    const double e = std::exp(a.value());
    t.d.fill(e);
    return compose(t, a);
}

template <int K>
Jet<K> log(const Jet<K>& a) {
    const double c = a.value();
    detail::require_positive(c, "log");
    UnivariateTable t;
    t.d = {std::log(c), 1.0 / c, -1.0 / (c * c), 2.0 / (c * c * c), -6.0 / (c * c * c * c)};
    return compose(t, a);
}

template <int K>
Jet<K> sqrt(const Jet<K>& a) {
    const double c = a.value();
    detail::require_positive(c, "sqrt");
    const double r = std::sqrt(c);
    UnivariateTable t;
    t.d = {r, 0.5 / r, -0.25 / (r * c), 0.375 / (r * c * c), -0.9375 / (r * c * c * c)};
    return compose(t, a);
}

template <int K>
Jet<K> sin(const Jet<K>& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    UnivariateTable t;
    t.d = {s, c, -s, -c, s};
    return compose(t, a);
}

template <int K>
Jet<K> cos(const Jet<K>& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    UnivariateTable t;
    t.d = {c, -s, -c, s, c};
    return compose(t, a);
}

template <int K>
Jet<K> sinh(const Jet<K>& a) {
    const double s = std::sinh(a.value()), c = std::cosh(a.value());
    UnivariateTable t;
    t.d = {s, c, s, c, s};
    return compose(t, a);
}

template <int K>
Jet<K> cosh(const Jet<K>& a) {
    const double s = std::sinh(a.value()), c = std::cosh(a.value());
    UnivariateTable t;
    t.d = {c, s, c, s, c};
    return compose(t, a);
}

/// a^p for real exponent; constant term must be positive.
template <int K>
Jet<K> pow(const Jet<K>& a, double p) {
    const double c = a.value();
    detail::require_positive(c, "pow");
    UnivariateTable t;
    double coef = 1.0;
    for (int m = 0; m <= kMaxOrder; ++m) {
        t.d[m] = coef * std::pow(c, p - m);
        coef *= p - m;
    }
    return compose(t, a);
}

template <int K>
Jet<K> reciprocal(const Jet<K>& a) {
    const double c = a.value();
    if (c == 0.0 || std::abs(c) < 1e-300)
        throw evaluation_error("reciprocal: constant term is zero");
    UnivariateTable t;
    double pw = 1.0 / c, sign = 1.0, fact = 1.0;
    for (int m = 0; m <= kMaxOrder; ++m) {
        t.d[m] = sign * fact * pw;
        pw /= c;
        sign = -sign;
        fact *= m + 1;
    }
    return compose(t, a);
}

template <int K>
Jet<K> square(const Jet<K>& a) {
    return a * a;
}

using Jet4 = Jet<4>;

/// Jets of the coordinate functions at a chart point.
inline std::vector<Jet4> coordinate_jets(std::span<const double> point) {
    const int n = static_cast<int>(point.size());
    std::vector<Jet4> x;
    x.reserve(n);
    for (int i = 0; i < n; ++i) x.push_back(Jet4::variable(n, i, point[i]));
    return x;
}

}  // namespace geoflow
