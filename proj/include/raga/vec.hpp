#ifndef RAGA_VEC_HPP
#define RAGA_VEC_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace raga {

// Flat model/gradient vector of fixed dimension p.
using ParameterVector = std::vector<double>;

inline void check_same_dim(const ParameterVector& a, const ParameterVector& b, const char* what) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

inline void add_scaled(ParameterVector& y, double a, const ParameterVector& x) {
    check_same_dim(y, x, "add_scaled");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline ParameterVector scaled(const ParameterVector& x, double a) {
    ParameterVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i];
    return y;
}

inline ParameterVector vec_sub(const ParameterVector& a, const ParameterVector& b) {
    check_same_dim(a, b, "vec_sub");
    ParameterVector y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] - b[i];
    return y;
}

inline ParameterVector vec_add(const ParameterVector& a, const ParameterVector& b) {
    check_same_dim(a, b, "vec_add");
    ParameterVector y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
    return y;
}

inline double dot(const ParameterVector& a, const ParameterVector& b) {
    check_same_dim(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(const ParameterVector& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

inline double norm(const ParameterVector& a) { return std::sqrt(squared_norm(a)); }

inline double distance(const ParameterVector& a, const ParameterVector& b) {
    check_same_dim(a, b, "distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool all_finite(const ParameterVector& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace raga

#endif // RAGA_VEC_HPP
