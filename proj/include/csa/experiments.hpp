#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csa/derived.hpp"
#include "csa/kernel.hpp"

namespace csa {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRefused = 2, kExitCheckFailed = 3 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat key = value configuration. Lines starting with '#' are comments.
/// Keys are checked against the known set so typos fail loudly.
class Config {
public:
    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path& path);

    /// "key=value" override; later overrides win.
    void apply_override(std::string_view assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    std::string require(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    Rational get_rational(const std::string& key, const std::string& fallback) const;
    std::vector<std::string> get_list(const std::string& key, const std::string& fallback) const;

    /// Sorted key=value lines without out_dir and workers; the hash is
    /// FNV-1a 64 of this text.
    std::string canonical_text() const;
    std::string hash() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

std::uint64_t fnv1a64(std::string_view text);

/// The model and run parameters shared by every subcommand.
struct ExperimentConfig {
    ModelSpec spec;
    std::string target = "xi";  // xi, zeta, eta, u, v
    std::uint64_t horizon = 1000;
    std::uint64_t replicas = 1;
    std::uint64_t seed_base = 1;
    std::uint64_t thinning = 1;
    HeightState initial;
    SamplingMode sampling = SamplingMode::Float;
    std::filesystem::path out_dir = ".";
    std::string hash;

    std::uint64_t seed(std::uint64_t replica) const { return seed_base + replica; }
};

ExperimentConfig experiment_config(const Config& config);

/// Each command writes its files into out_dir and returns an exit code.
/// Configuration problems throw ConfigError; refusals (exponent cap,
/// singular input) propagate as their own exception types.
int cmd_simulate(const Config& config);
int cmd_drift_scan(const Config& config);
int cmd_verify_identity(const Config& config);
int cmd_classify(const Config& config);
int cmd_streamlines(const Config& config);
int cmd_extreme(const Config& config);

/// Dispatches by subcommand name and maps exceptions to exit codes,
/// printing the message to stderr.
int run_command(std::string_view name, const Config& config);

}  // namespace csa
