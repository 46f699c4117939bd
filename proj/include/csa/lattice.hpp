#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace csa {

/// Integer vector tagged with the process it belongs to, so a DiffState
/// cannot be passed where a HeightState is expected.
template <class Tag>
struct LatticeVector {
    std::vector<std::int64_t> values;

    LatticeVector() = default;
    explicit LatticeVector(std::vector<std::int64_t> v) : values(std::move(v)) {}
    LatticeVector(std::initializer_list<std::int64_t> v) : values(v) {}

    std::size_t size() const { return values.size(); }
    std::int64_t& operator[](std::size_t i) { return values[i]; }
    std::int64_t operator[](std::size_t i) const { return values[i]; }
    auto begin() const { return values.begin(); }
    auto end() const { return values.end(); }
    auto begin() { return values.begin(); }
    auto end() { return values.end(); }
    std::span<const std::int64_t> view() const { return values; }

    friend bool operator==(const LatticeVector&, const LatticeVector&) = default;
};

using HeightState = LatticeVector<struct HeightTag>;        // xi, one entry per site
using DiffState = LatticeVector<struct DiffTag>;            // zeta_i = xi_i - xi_{N+1}
using EtaState = LatticeVector<struct EtaTag>;              // consecutive differences, sum 0
using PotentialState = LatticeVector<struct PotentialTag>;  // u_i = sum over U_i
using VState = LatticeVector<struct VTag>;                  // v_k = u_k - u_{N+1}

}  // namespace csa
