#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<double>> yields second
// derivatives, which is how Hessians in the momentum are formed.

#include <cmath>
#include <type_traits>

#include <Eigen/Core>

namespace hamflow {

template <class T>
struct Dual;

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};
template <class T>
inline constexpr bool is_dual_v = is_dual<T>::value;

template <class A>
concept Arithmetic = std::is_arithmetic_v<A>;

template <class T>
struct Dual {
    T v{};  // value
    T d{};  // tangent

    constexpr Dual() = default;
    constexpr Dual(T value) : v(value), d(0) {}  // NOLINT(google-explicit-constructor)
    constexpr Dual(T value, T tangent) : v(value), d(tangent) {}
    template <Arithmetic A>
        requires(!std::is_same_v<T, A>)
    constexpr Dual(A value) : v(T(value)), d(0) {}  // NOLINT(google-explicit-constructor)

    constexpr Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    constexpr Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
    constexpr Dual& operator*=(const Dual& o) {
        d = d * o.v + v * o.d;
        v *= o.v;
        return *this;
    }
    constexpr Dual& operator/=(const Dual& o) {
        const T inv = T(1) / o.v;
        d = (d - v * inv * o.d) * inv;
        v *= inv;
        return *this;
    }
};

// Primal value at any nesting depth.
template <class S>
constexpr double primal(const S& x) {
    if constexpr (is_dual_v<S>) {
        return primal(x.v);
    } else {
        return static_cast<double>(x);
    }
}

template <class T> constexpr Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> constexpr Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> constexpr Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> constexpr Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <class T> constexpr Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> constexpr Dual<T> operator+(const Dual<T>& a) { return a; }

template <class T, Arithmetic A> constexpr Dual<T> operator+(const Dual<T>& a, A b) { return {a.v + T(b), a.d}; }
template <class T, Arithmetic A> constexpr Dual<T> operator+(A b, const Dual<T>& a) { return {T(b) + a.v, a.d}; }
template <class T, Arithmetic A> constexpr Dual<T> operator-(const Dual<T>& a, A b) { return {a.v - T(b), a.d}; }
template <class T, Arithmetic A> constexpr Dual<T> operator-(A b, const Dual<T>& a) { return {T(b) - a.v, -a.d}; }
template <class T, Arithmetic A> constexpr Dual<T> operator*(const Dual<T>& a, A b) { return {a.v * T(b), a.d * T(b)}; }
template <class T, Arithmetic A> constexpr Dual<T> operator*(A b, const Dual<T>& a) { return {T(b) * a.v, T(b) * a.d}; }
template <class T, Arithmetic A> constexpr Dual<T> operator/(const Dual<T>& a, A b) { return {a.v / T(b), a.d / T(b)}; }
template <class T, Arithmetic A> constexpr Dual<T> operator/(A b, const Dual<T>& a) { return Dual<T>(T(b)) / a; }

// Comparisons look at the primal value only; they exist so user code can branch.
template <class T> constexpr bool operator<(const Dual<T>& a, const Dual<T>& b) { return primal(a) < primal(b); }
template <class T> constexpr bool operator>(const Dual<T>& a, const Dual<T>& b) { return primal(a) > primal(b); }
template <class T> constexpr bool operator<=(const Dual<T>& a, const Dual<T>& b) { return primal(a) <= primal(b); }
template <class T> constexpr bool operator>=(const Dual<T>& a, const Dual<T>& b) { return primal(a) >= primal(b); }
template <class T> constexpr bool operator==(const Dual<T>& a, const Dual<T>& b) { return a.v == b.v && a.d == b.d; }
template <class T, Arithmetic A> constexpr bool operator<(const Dual<T>& a, A b) { return primal(a) < b; }
template <class T, Arithmetic A> constexpr bool operator>(const Dual<T>& a, A b) { return primal(a) > b; }
template <class T, Arithmetic A> constexpr bool operator<(A b, const Dual<T>& a) { return b < primal(a); }
template <class T, Arithmetic A> constexpr bool operator>(A b, const Dual<T>& a) { return b > primal(a); }

template <class T>
Dual<T> sin(const Dual<T>& x) {
    using std::cos;
    using std::sin;
    return {sin(x.v), x.d * cos(x.v)};
}
template <class T>
Dual<T> cos(const Dual<T>& x) {
    using std::cos;
    using std::sin;
    return {cos(x.v), -(x.d * sin(x.v))};
}
template <class T>
Dual<T> tan(const Dual<T>& x) {
    using std::tan;
    const T t = tan(x.v);
    return {t, x.d * (T(1) + t * t)};
}
template <class T>
Dual<T> exp(const Dual<T>& x) {
    using std::exp;
    const T e = exp(x.v);
    return {e, x.d * e};
}
template <class T>
Dual<T> log(const Dual<T>& x) {
    using std::log;
    return {log(x.v), x.d / x.v};
}
template <class T>
Dual<T> sqrt(const Dual<T>& x) {
    using std::sqrt;
    const T s = sqrt(x.v);
    return {s, x.d / (T(2) * s)};
}
template <class T>
Dual<T> sinh(const Dual<T>& x) {
    using std::cosh;
    using std::sinh;
    return {sinh(x.v), x.d * cosh(x.v)};
}
template <class T>
Dual<T> cosh(const Dual<T>& x) {
    using std::cosh;
    using std::sinh;
    return {cosh(x.v), x.d * sinh(x.v)};
}
template <class T>
Dual<T> tanh(const Dual<T>& x) {
    using std::tanh;
    const T t = tanh(x.v);
    return {t, x.d * (T(1) - t * t)};
}
template <class T>
Dual<T> atan(const Dual<T>& x) {
    using std::atan;
    return {atan(x.v), x.d / (T(1) + x.v * x.v)};
}
template <class T>
Dual<T> abs(const Dual<T>& x) {
    return primal(x) < 0.0 ? -x : x;
}
template <class T, Arithmetic A>
Dual<T> pow(const Dual<T>& x, A e) {
    using std::pow;
    const T pm1 = pow(x.v, double(e) - 1.0);
    return {pm1 * x.v, x.d * (double(e) * pm1)};
}
template <class T>
Dual<T> pow(const Dual<T>& x, const Dual<T>& e) {
    return exp(e * log(x));
}

// Second-order nested duals for a pair of seed directions.
using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

}  // namespace hamflow

namespace Eigen {

template <class T>
struct NumTraits<hamflow::Dual<T>> : NumTraits<double> {
    using Real = hamflow::Dual<T>;
    using NonInteger = hamflow::Dual<T>;
    using Nested = hamflow::Dual<T>;
    using Literal = hamflow::Dual<T>;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 2,
        AddCost = 4,
        MulCost = 6
    };
    static inline Real epsilon() { return Real(NumTraits<double>::epsilon()); }
    static inline Real dummy_precision() { return Real(NumTraits<double>::dummy_precision()); }
    static inline Real highest() { return Real(NumTraits<double>::highest()); }
    static inline Real lowest() { return Real(NumTraits<double>::lowest()); }
    static inline int digits10() { return NumTraits<double>::digits10(); }
};

template <class T, typename BinaryOp>
struct ScalarBinaryOpTraits<hamflow::Dual<T>, double, BinaryOp> {
    using ReturnType = hamflow::Dual<T>;
};
template <class T, typename BinaryOp>
struct ScalarBinaryOpTraits<double, hamflow::Dual<T>, BinaryOp> {
    using ReturnType = hamflow::Dual<T>;
};

}  // namespace Eigen
