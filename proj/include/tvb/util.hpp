#pragma once
// Shared primitives: bitsets, exact rationals, deterministic RNG, typed errors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/dynamic_bitset.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "json.hpp"

namespace tvb {

using Vertex = std::uint32_t;
using Colour = std::uint32_t;
using Json = nlohmann::json;
using Bitset = boost::dynamic_bitset<std::uint64_t>;
// Arbitrary precision: chained slicing rules square densities repeatedly.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::rational<BigInt>;

template <class F>
inline void for_each_bit(const Bitset& b, F&& f) {
    for (auto i = b.find_first(); i != Bitset::npos; i = b.find_next(i)) f(static_cast<Vertex>(i));
}

inline std::vector<Vertex> bits_to_vector(const Bitset& b) {
    std::vector<Vertex> out;
    out.reserve(b.count());
    for_each_bit(b, [&](Vertex v) { out.push_back(v); });
    return out;
}

inline Bitset vector_to_bits(std::size_t n, const std::vector<Vertex>& xs) {
    Bitset b(n);
    for (Vertex x : xs) {
        if (x >= n) throw std::out_of_range("element outside universe");
        b.set(x);
    }
    return b;
}

inline double to_double(const Rational& r) {
    BigInt num = r.numerator(), den = r.denominator();
    const bool neg = num < 0;
    if (neg) num = -num;
    if (num == 0) return 0.0;
    // keep both parts inside the double range before dividing
    const auto top = std::max(boost::multiprecision::msb(num), boost::multiprecision::msb(den));
    if (top > 900) {
        const auto shift = static_cast<unsigned>(top - 900);
        num >>= shift;
        den >>= shift;
        if (den == 0) return neg ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    }
    const double v = num.convert_to<double>() / den.convert_to<double>();
    return neg ? -v : v;
}

// Best rational approximation with bounded denominator (continued fractions).
// Decimal parameters such as 0.05 come back as 1/20.
inline Rational to_rational(double x, std::int64_t max_den = 1000000) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite parameter");
    bool neg = x < 0;
    x = std::fabs(x);
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        double a = std::floor(r);
        auto ai = static_cast<std::int64_t>(a);
        std::int64_t h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        double frac = r - a;
        if (frac < 1e-12 || std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - x) < 1e-15) break;
        r = 1.0 / frac;
    }
    Rational out{BigInt(h1), BigInt(k1)};
    return neg ? -out : out;
}

inline std::string rational_string(const Rational& r) {
    if (r.denominator() == 1) return r.numerator().str();
    return r.numerator().str() + "/" + r.denominator().str();
}

// ---------------------------------------------------------------- RNG

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent sub-seed for a named stage / attempt.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : tag) h = (h ^ ch) * 1099511628211ULL;
    return derive_seed(seed, h);
}

inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag, std::uint64_t index) {
    return derive_seed(derive_seed(seed, tag), index);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform integer in [0, n); n > 0. Rejection sampling keeps it unbiased.
    std::size_t below(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below(0)");
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do { x = eng_(); } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return unit() < p;
    }

    template <class T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) std::swap(xs[i - 1], xs[below(i)]);
    }

    // k distinct elements of xs, in random order.
    template <class T>
    std::vector<T> sample(std::vector<T> xs, std::size_t k) {
        if (k > xs.size()) throw std::invalid_argument("sample larger than population");
        for (std::size_t i = 0; i < k; ++i) std::swap(xs[i], xs[i + below(xs.size() - i)]);
        xs.resize(k);
        return xs;
    }

private:
    std::mt19937_64 eng_;
};

// ---------------------------------------------------------------- errors

// Contract violations detected before any work is done (bad input shapes).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what) : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

// Typed, expected failure of a procedure whose probabilistic or counting
// assumption did not hold at this scale.
struct Failure {
    std::string stage;
    std::string reason;  // e.g. CandidateExhausted, ChunkingFailed
    Json diagnostics = Json::object();
    std::uint64_t seed = 0;
};

inline Json to_json(const Failure& f) {
    return Json{{"stage", f.stage}, {"reason", f.reason}, {"diagnostics", f.diagnostics}, {"seed", f.seed}};
}

template <class T>
class Expected {
public:
    Expected(T value) : v_(std::move(value)) {}
    Expected(Failure f) : v_(std::move(f)) {}
    bool ok() const { return v_.index() == 0; }
    explicit operator bool() const { return ok(); }
    T& value() { return std::get<0>(v_); }
    const T& value() const { return std::get<0>(v_); }
    T& operator*() { return value(); }
    const T& operator*() const { return value(); }
    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }
    const Failure& error() const { return std::get<1>(v_); }
    Failure& error() { return std::get<1>(v_); }

private:
    std::variant<T, Failure> v_;
};

inline Failure make_failure(std::string stage, std::string reason, std::uint64_t seed, Json diag = Json::object()) {
    return Failure{std::move(stage), std::move(reason), std::move(diag), seed};
}

inline std::int64_t ceil_to_int(double x) { return static_cast<std::int64_t>(std::ceil(x - 1e-9)); }
inline std::int64_t floor_to_int(double x) { return static_cast<std::int64_t>(std::floor(x + 1e-9)); }

}  // namespace tvb
