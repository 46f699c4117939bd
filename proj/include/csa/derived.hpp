#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "csa/kernel.hpp"
#include "csa/lattice.hpp"

namespace csa {

DiffState diff_state(const HeightState& xi);
EtaState eta_state(const HeightState& xi);
VState v_state(const PotentialState& u);

/// Heights with the last site pinned at 0 that map to `zeta` (inverse of
/// diff_state up to the common shift).
HeightState heights_from_diff(const DiffState& zeta);
/// Heights with the last site pinned at 0 that map to `eta`; requires sum 0.
HeightState heights_from_eta(const EtaState& eta);

/// Which chain a kernel drives.
///   Zeta: differences to the last site (dimension N), any mode
///   Eta:  consecutive differences (dimension N+1, sum zero), A2 only
///   U:    potentials (dimension N+1), A3 only
///   V:    potential differences to the last site (dimension N), A3 only
enum class Process { Zeta, Eta, U, V };

std::string_view to_string(Process process);
Process parse_process(std::string_view text);

/// One outcome of a derived chain: weight beta^{<coeffs, x> + offset}, and
/// the state moves by `delta`.
struct Move {
    std::vector<std::int64_t> exponent_coeffs;
    std::int64_t exponent_offset = 0;
    std::vector<std::int64_t> delta;

    std::int64_t exponent(std::span<const std::int64_t> x) const;
};

/// Every derived chain of the growth process has log-weights that are affine
/// in the current state, so a kernel is a list of moves.
struct LinearKernel {
    Process process;
    ModelSpec spec;
    std::size_t dimension;
    std::vector<Move> moves;

    /// Eta states must sum to zero; everything else is unconstrained.
    bool admits(std::span<const std::int64_t> x) const;
    std::vector<std::int64_t> exponents(std::span<const std::int64_t> x) const;
    std::vector<std::int64_t> apply(std::span<const std::int64_t> x, std::size_t move) const;
};

LinearKernel make_kernel(const ModelSpec& spec, Process process);

SiteDistribution kernel_distribution(const LinearKernel& kernel, std::span<const std::int64_t> x,
                                     std::int64_t cap = kDefaultExponentCap);

/// Outcome k < N adds e_k; outcome N subtracts one from every coordinate.
SiteDistribution zeta_transition_distribution(const ModelSpec& spec, const DiffState& zeta,
                                              std::int64_t cap = kDefaultExponentCap);
/// Outcome i is adsorption at site i: eta_i += 1, eta_{i+1} -= 1.
SiteDistribution eta_transition_distribution(const ModelSpec& spec, const EtaState& eta,
                                             std::int64_t cap = kDefaultExponentCap);
/// Outcome k is E_k: u_{k-1}, u_k, u_{k+1} all increase by one.
SiteDistribution u_transition_distribution(const ModelSpec& spec, const PotentialState& u,
                                           std::int64_t cap = kDefaultExponentCap);
SiteDistribution v_transition_distribution(const ModelSpec& spec, const VState& v,
                                           std::int64_t cap = kDefaultExponentCap);

/// Image of a height state under the map that defines `process`.
std::vector<std::int64_t> project(const ModelSpec& spec, Process process, const HeightState& xi);

/// A derived chain stepped on its own kernel (float sampling), for checking
/// against the image of a height-chain path.
class ProcessChain {
public:
    ProcessChain(LinearKernel kernel, std::vector<std::int64_t> initial, std::uint64_t seed);

    std::size_t step();
    std::span<const std::int64_t> state() const { return state_; }

private:
    LinearKernel kernel_;
    std::vector<std::int64_t> state_;
    std::vector<std::int64_t> exponents_;
    Rng rng_;
    LogDomainWeights weights_;
    std::vector<double> scratch_;
};

}  // namespace csa
