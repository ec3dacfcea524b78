#pragma once

#include <vector>

#include "geoflow/errors.hpp"

namespace geoflow {

/// Dense rank-R array with runtime dimension, row-major. Element type is
/// double for snapshots and Jet<K> for field values.
template <typename T, int Rank>
class Tensor {
    static_assert(Rank >= 1 && Rank <= 5);

public:
    Tensor() = default;
    explicit Tensor(int dim, const T& fill = T{}) : dim_(dim) {
        std::size_t n = 1;
        for (int r = 0; r < Rank; ++r) n *= static_cast<std::size_t>(dim);
        v_.assign(n, fill);
    }

    int dim() const { return dim_; }
    std::size_t size() const { return v_.size(); }

    T& operator()(int i) requires(Rank == 1) { return v_[static_cast<std::size_t>(i)]; }
    const T& operator()(int i) const requires(Rank == 1) { return v_[static_cast<std::size_t>(i)]; }

    T& operator()(int i, int j) requires(Rank == 2) { return v_[idx(i, j)]; }
    const T& operator()(int i, int j) const requires(Rank == 2) { return v_[idx(i, j)]; }

    T& operator()(int i, int j, int k) requires(Rank == 3) { return v_[idx(i, j, k)]; }
    const T& operator()(int i, int j, int k) const requires(Rank == 3) { return v_[idx(i, j, k)]; }

    T& operator()(int i, int j, int k, int l) requires(Rank == 4) { return v_[idx(i, j, k, l)]; }
    const T& operator()(int i, int j, int k, int l) const requires(Rank == 4) {
        return v_[idx(i, j, k, l)];
    }

    T& operator()(int i, int j, int k, int l, int m) requires(Rank == 5) {
        return v_[idx(i, j, k, l) * dim_ + m];
    }
    const T& operator()(int i, int j, int k, int l, int m) const requires(Rank == 5) {
        return v_[idx(i, j, k, l) * dim_ + m];
    }

    auto begin() { return v_.begin(); }
    auto end() { return v_.end(); }
    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * dim_ + j; }
    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
    }
    std::size_t idx(int i, int j, int k, int l) const {
        return ((static_cast<std::size_t>(i) * dim_ + j) * dim_ + k) * dim_ + l;
    }

    int dim_ = 0;
    std::vector<T> v_;
};

template <typename T>
using Vec = Tensor<T, 1>;
template <typename T>
using Mat = Tensor<T, 2>;

/// max |entry| over all slots, for double tensors.
template <int Rank>
double max_abs(const Tensor<double, Rank>& t) {
    double m = 0.0;
    for (double v : t) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace geoflow
