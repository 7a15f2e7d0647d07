#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wbea {

// Supported dimension envelope. Everything in the pipeline is desk scale
// (the worked cases are d = 1 and small isotropic d), so exponent vectors
// are fixed-size and cheap to copy and compare.
inline constexpr int kMaxDim = 4;

// Exponent / derivative-order vector in up to kMaxDim coordinates.
// Unused coordinates stay zero so comparisons ignore the dimension.
struct MultiIndex {
    std::array<std::uint8_t, kMaxDim> e{};

    static MultiIndex zero() { return MultiIndex{}; }
    static MultiIndex unit(int i) {
        MultiIndex m;
        m.e[static_cast<std::size_t>(i)] = 1;
        return m;
    }

    std::uint8_t operator[](int i) const { return e[static_cast<std::size_t>(i)]; }
    std::uint8_t& operator[](int i) { return e[static_cast<std::size_t>(i)]; }

    int total() const {
        int s = 0;
        for (auto v : e) s += v;
        return s;
    }
    bool is_zero() const { return total() == 0; }

    MultiIndex plus(const MultiIndex& o) const {
        MultiIndex r;
        for (int i = 0; i < kMaxDim; ++i) {
            const int s = e[static_cast<std::size_t>(i)] + o.e[static_cast<std::size_t>(i)];
            if (s > 255) throw std::overflow_error("multi-index exponent overflow");
            r.e[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(s);
        }
        return r;
    }

    // Componentwise subtraction; caller guarantees o <= *this.
    MultiIndex minus(const MultiIndex& o) const {
        MultiIndex r;
        for (int i = 0; i < kMaxDim; ++i)
            r.e[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(e[static_cast<std::size_t>(i)] - o.e[static_cast<std::size_t>(i)]);
        return r;
    }

    bool dominates(const MultiIndex& o) const {
        for (int i = 0; i < kMaxDim; ++i)
            if (e[static_cast<std::size_t>(i)] < o.e[static_cast<std::size_t>(i)]) return false;
        return true;
    }

    auto operator<=>(const MultiIndex&) const = default;
};

// Graded order: total degree first, then lexicographic. Used where
// reductions must walk terms from the top down.
struct GradedLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const {
        const int ta = a.total(), tb = b.total();
        if (ta != tb) return ta < tb;
        return a.e < b.e;
    }
};

std::string to_string(const MultiIndex& m, int dim);

}  // namespace wbea
