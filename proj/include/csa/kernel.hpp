#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csa/lattice.hpp"
#include "csa/rational.hpp"

namespace csa {

/// Shape of the neighbourhood U_i on the torus.
///   A1: {i}            no interaction
///   A2: {i, i+1}       asymmetric
///   A3: {i-1, i, i+1}  symmetric
enum class Interaction { A1, A2, A3 };

std::string_view to_string(Interaction mode);
Interaction parse_interaction(std::string_view text);

inline constexpr std::int64_t kDefaultExponentCap = 4096;

class ExponentCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ModeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ModelSpec {
    std::size_t sites = 3;  // N+1
    Rational beta = 1;
    Interaction mode = Interaction::A1;

    /// Validating factory. A two-site torus is only accepted with
    /// `allow_two_sites`, for the beta = 1 sanity runs.
    static ModelSpec make(std::size_t sites, Rational beta, Interaction mode,
                          bool allow_two_sites = false);

    std::size_t dimension() const { return sites - 1; }  // N
    bool is_neutral() const { return beta == 1; }
};

/// Site indices are 0-based throughout the library; site i here is site i+1
/// in the usual 1-based labelling.
std::vector<std::size_t> neighbourhood(const ModelSpec& spec, std::size_t i);

PotentialState potentials(const ModelSpec& spec, const HeightState& xi);

struct SiteDistribution {
    std::vector<Rational> probs;

    Rational total() const;
};

/// probs[i] = beta^{e_i} / sum_j beta^{e_j}, exact. Refuses when any |e_i|
/// exceeds `cap`.
SiteDistribution distribution_from_exponents(const Rational& beta,
                                             std::span<const std::int64_t> exponents,
                                             std::int64_t cap = kDefaultExponentCap);

SiteDistribution transition_distribution(const ModelSpec& spec, const HeightState& xi,
                                         std::int64_t cap = kDefaultExponentCap);

using Rng = std::mt19937_64;

/// Uniform double in [0,1) from the top 53 bits of one draw; identical on
/// every platform, unlike std::uniform_real_distribution.
double uniform01(Rng& rng);

enum class SamplingMode { Float, Exact };

/// Weights beta^{e_i} evaluated as exp(-|e_i - e_ref| * |log beta|), where
/// e_ref is the exponent of the heaviest outcome. Every weight is in (0,1],
/// so nothing overflows however large the exponents grow.
class LogDomainWeights {
public:
    explicit LogDomainWeights(const Rational& beta);

    /// Weight of an outcome `gap` levels below the heaviest one.
    double at_gap(std::uint64_t gap) const {
        return gap < table_.size() ? table_[gap] : 0.0;
    }
    /// +1 if larger exponents are heavier (beta > 1), -1 if lighter, 0 if beta = 1.
    int orientation() const { return orientation_; }

    std::size_t sample(std::span<const std::int64_t> exponents, Rng& rng,
                       std::vector<double>& scratch) const;

private:
    std::vector<double> table_;
    int orientation_ = 0;
};

/// Cumulative inversion against a dyadic uniform refined 64 bits at a time
/// until the dyadic interval lies inside one cell. Exact for any rational
/// distribution.
std::size_t sample_exact(const SiteDistribution& dist, Rng& rng);

struct StepResult {
    std::size_t site;
    HeightState state;
};

StepResult step(const ModelSpec& spec, const HeightState& xi, Rng& rng,
                SamplingMode sampling = SamplingMode::Float,
                std::int64_t cap = kDefaultExponentCap);

/// One path of the growth process with potentials maintained incrementally.
class Chain {
public:
    Chain(ModelSpec spec, HeightState initial, std::uint64_t seed,
          SamplingMode sampling = SamplingMode::Float, std::int64_t cap = kDefaultExponentCap);

    std::size_t step();

    const ModelSpec& spec() const { return spec_; }
    const HeightState& state() const { return state_; }
    const PotentialState& potentials() const { return potentials_; }
    std::uint64_t time() const { return time_; }

private:
    ModelSpec spec_;
    HeightState state_;
    PotentialState potentials_;
    std::vector<std::vector<std::size_t>> touched_by_;  // sites whose potential sees site k
    Rng rng_;
    SamplingMode sampling_;
    std::int64_t cap_;
    LogDomainWeights weights_;
    std::vector<double> scratch_;
    std::uint64_t time_ = 0;
};

struct Snapshot {
    std::uint64_t t;
    std::size_t site;
    HeightState state;
};

struct Trajectory {
    std::vector<std::size_t> sites;   // chosen site at t = 1..T
    std::vector<Snapshot> snapshots;  // every `thinning`-th state
    HeightState final_state;
};

/// Called after every step with (t, chosen site, state at t).
using StepObserver = std::function<void(std::uint64_t, std::size_t, const HeightState&)>;

/// Runs `steps` transitions. Snapshots are kept for t % thinning == 0;
/// thinning 0 keeps none. Observers see every step.
Trajectory simulate(const ModelSpec& spec, const HeightState& initial, std::uint64_t steps,
                    std::uint64_t seed, std::uint64_t thinning = 1,
                    const StepObserver& observer = {},
                    SamplingMode sampling = SamplingMode::Float);

/// Streaming variant: no trajectory is stored.
HeightState run(Chain& chain, std::uint64_t steps, const StepObserver& observer);

HeightState flat_state(std::size_t sites, std::int64_t level = 0);

}  // namespace csa
