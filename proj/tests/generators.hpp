#pragma once

// Small hand-rolled generators for property tests. Every generator draws from
// a seeded mt19937_64 so failures reproduce from the printed seed.

#include <cstdint>
#include <random>
#include <vector>

#include "csa/derived.hpp"
#include "csa/kernel.hpp"

namespace csa::testgen {

inline std::int64_t int_in(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline HeightState heights(Rng& rng, std::size_t sites, std::int64_t spread) {
    HeightState xi;
    xi.values.resize(sites);
    for (auto& x : xi) x = int_in(rng, -spread, spread);
    return xi;
}

inline std::vector<std::int64_t> lattice_point(Rng& rng, std::size_t dimension, std::int64_t radius) {
    std::vector<std::int64_t> x(dimension);
    for (auto& v : x) v = int_in(rng, -radius, radius);
    return x;
}

/// Sum-zero point built from random heights, so it is a valid eta state.
inline std::vector<std::int64_t> eta_point(Rng& rng, std::size_t sites, std::int64_t spread) {
    return eta_state(heights(rng, sites, spread)).values;
}

inline const std::vector<Rational>& betas() {
    static const std::vector<Rational> b{Rational(1, 2), Rational(9, 10), Rational(2)};
    return b;
}

inline const std::vector<Interaction>& modes() {
    static const std::vector<Interaction> m{Interaction::A1, Interaction::A2, Interaction::A3};
    return m;
}

inline std::vector<Process> processes_for(Interaction mode) {
    std::vector<Process> p{Process::Zeta};
    if (mode == Interaction::A2) p.push_back(Process::Eta);
    if (mode == Interaction::A3) {
        p.push_back(Process::U);
        p.push_back(Process::V);
    }
    return p;
}

}  // namespace csa::testgen
