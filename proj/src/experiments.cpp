#include "csa/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csa/classify.hpp"
#include "csa/dynamics.hpp"
#include "csa/lyapunov.hpp"
#include "csa/parallel.hpp"
#include "csa/scan.hpp"

namespace csa {

using json = nlohmann::ordered_json;

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        // model and run
        "sites", "beta", "mode", "allow_two_sites", "process", "horizon", "replicas", "seed_base", "thinning",
        "initial", "sampling", "out_dir", "workers",
        // classify
        "classifiers", "burn_in", "escape_after", "escape_min_windows", "winner_window", "profile_tolerance",
        // drift-scan and verify-identity
        "function", "scan", "radius", "lo", "hi", "band_norm", "band_min", "band_max", "epsilon", "threshold",
        "exceptional", "annulus_width", "search_radius", "float_filter", "cap",
        // streamlines
        "grid_u", "grid_v", "starts", "h", "max_steps", "direction", "stop_at_singular", "singular_tol",
        "equilibrium_tol",
        // extreme
        "extreme_mode", "window",
    };
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(sep, start);
        const auto piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!piece.empty()) out.push_back(piece);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_integer(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "' expects an integer, got '" + text + "'");
    return value;
}

double parse_double(const std::string& key, const std::string& text) {
    double value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
    }
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : "nan";
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Config Config::parse(std::string_view text) {
    Config c;
    for (const auto& raw : split(text, '\n')) {
        if (raw.empty() || raw[0] == '#') continue;
        const auto eq = raw.find('=');
        if (eq == std::string::npos) throw ConfigError("config line without '=': " + raw);
        const auto key = trim(std::string_view(raw).substr(0, eq));
        if (c.has(key)) throw ConfigError("duplicate config key '" + key + "'");
        c.set(key, trim(std::string_view(raw).substr(eq + 1)));
    }
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void Config::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override must look like key=value: " + std::string(assignment));
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
    entries_[key] = value;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

std::string Config::require(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? parse_integer<std::uint64_t>(key, require(key)) : fallback;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? parse_integer<std::int64_t>(key, require(key)) : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? parse_double(key, require(key)) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = require(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

Rational Config::get_rational(const std::string& key, const std::string& fallback) const {
    const auto text = get(key, fallback);
    try {
        return parse_rational(text);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("'" + key + "': " + e.what());
    }
}

std::vector<std::string> Config::get_list(const std::string& key, const std::string& fallback) const {
    return split(get(key, fallback), ',');
}

std::string Config::canonical_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        if (k == "out_dir" || k == "workers") continue;  // where and how fast, not what
        out += k + "=" + v + "\n";
    }
    return out;
}

std::string Config::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_text())));
    return buf;
}

namespace {

ExperimentConfig experiment_config_with(const Config& config, Interaction default_mode, const std::string& default_process) {
    ExperimentConfig e;
    Interaction mode;
    try {
        mode = parse_interaction(config.get("mode", std::string(to_string(default_mode))));
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    const auto beta = config.get_rational("beta", "1");
    try {
        e.spec = ModelSpec::make(config.get_uint("sites", 3), beta, mode, config.get_bool("allow_two_sites", false));
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    e.target = config.get("process", default_process);
    if (e.target != "xi" && e.target != "zeta" && e.target != "eta" && e.target != "u" && e.target != "v") {
        throw ConfigError("process must be one of xi, zeta, eta, u, v");
    }
    if (e.target != "xi") {
        try {
            make_kernel(e.spec, parse_process(e.target));
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(ex.what());
        }
    }
    e.horizon = config.get_uint("horizon", 1000);
    e.replicas = config.get_uint("replicas", 1);
    e.seed_base = config.get_uint("seed_base", 1);
    e.thinning = config.get_uint("thinning", 1);
    if (e.horizon < 1) throw ConfigError("horizon must be at least 1");
    if (e.replicas < 1) throw ConfigError("replicas must be at least 1");
    if (e.thinning < 1) throw ConfigError("thinning must be at least 1");
    if (config.has("initial")) {
        std::vector<std::int64_t> values;
        for (const auto& v : config.get_list("initial", "")) values.push_back(parse_integer<std::int64_t>("initial", v));
        if (values.size() != e.spec.sites) throw ConfigError("initial state must list one height per site");
        e.initial = HeightState(values);
    } else {
        e.initial = flat_state(e.spec.sites);
    }
    const auto sampling = config.get("sampling", "float");
    if (sampling == "float") {
        e.sampling = SamplingMode::Float;
    } else if (sampling == "exact") {
        e.sampling = SamplingMode::Exact;
    } else {
        throw ConfigError("sampling must be float or exact");
    }
    e.out_dir = config.get("out_dir", ".");
    e.hash = config.hash();
    return e;
}

std::ofstream open_output(const ExperimentConfig& e, const std::string& name) {
    std::filesystem::create_directories(e.out_dir);
    std::ofstream out(e.out_dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (e.out_dir / name).string());
    return out;
}

void csv_preamble(std::ostream& os, const ExperimentConfig& e) {
    os << "# tool=csa version=" << kToolVersion << " config_hash=" << e.hash << "\n";
}

json json_header(const Config& config, const ExperimentConfig& e, std::string_view command) {
    json j;
    j["schema"] = "csa.record/1";
    j["tool"] = "csa";
    j["tool_version"] = kToolVersion;
    j["config_hash"] = e.hash;
    j["command"] = command;
    j["config"] = config.entries();
    return j;
}

void write_json(const ExperimentConfig& e, const std::string& name, const json& j) {
    auto out = open_output(e, name);
    out << j.dump(2) << "\n";
}

json rational_json(const Rational& q) { return json{{"exact", to_string(q)}, {"approx", q.get_d()}}; }

std::vector<std::int64_t> target_state(const ExperimentConfig& e, const HeightState& xi) {
    if (e.target == "xi") return xi.values;
    return project(e.spec, parse_process(e.target), xi);
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1) + 0.5));
    return v[std::min(idx, v.size() - 1)];
}

}  // namespace

ExperimentConfig experiment_config(const Config& config) { return experiment_config_with(config, Interaction::A1, "xi"); }

// ---------------------------------------------------------------------------

int cmd_simulate(const Config& config) {
    const auto e = experiment_config(config);
    std::vector<std::string> chunks(e.replicas);
    std::vector<HeightState> finals(e.replicas);
    parallel_for(
        e.replicas,
        [&](std::size_t r) {
            std::ostringstream os;
            Chain chain(e.spec, e.initial, e.seed(r), e.sampling);
            for (std::uint64_t t = 1; t <= e.horizon; ++t) {
                const auto site = chain.step();
                if (t % e.thinning != 0) continue;
                os << r << ',' << e.seed(r) << ',' << t << ',' << site + 1;
                for (auto v : target_state(e, chain.state())) os << ',' << v;
                os << '\n';
            }
            chunks[r] = os.str();
            finals[r] = chain.state();
        },
        config.get_uint("workers", 0));

    auto out = open_output(e, "trajectory.csv");
    csv_preamble(out, e);
    out << "replica,seed,t,site";
    const auto width = target_state(e, e.initial).size();
    for (std::size_t i = 0; i < width; ++i) out << ',' << e.target << i + 1;
    out << '\n';
    for (const auto& c : chunks) out << c;

    auto j = json_header(config, e, "simulate");
    j["records"] = json::array();
    for (std::size_t r = 0; r < e.replicas; ++r) {
        j["records"].push_back({{"config_hash", e.hash}, {"replica", r}, {"seed", e.seed(r)}, {"steps", e.horizon},
                                {"final_state", finals[r].values}});
    }
    write_json(e, "record.json", j);
    return kExitOk;
}

// ---------------------------------------------------------------------------

namespace {

ExceptionalSet exceptional_from(const std::string& text, std::size_t dimension) {
    if (text == "none") return ExceptionalSet::none();
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("exceptional must be none, max:R, l1:R or vgap:a");
    const auto kind = text.substr(0, colon);
    const auto value = parse_integer<std::int64_t>("exceptional", text.substr(colon + 1));
    if (kind == "max") return ExceptionalSet::max_norm_ball(value);
    if (kind == "l1") return ExceptionalSet::l1_ball(value);
    if (kind == "vgap") return ExceptionalSet::outside_v_gap_region(dimension, value);
    throw ConfigError("unknown exceptional set kind '" + kind + "'");
}

Region region_from(const Config& config, const LinearKernel& kernel) {
    Region region = Region::for_kernel(kernel, config.get_int("radius", 10));
    if (config.has("lo") || config.has("hi")) {
        auto parse_bounds = [&](const std::string& key) {
            std::vector<std::int64_t> v;
            for (const auto& s : config.get_list(key, "")) v.push_back(parse_integer<std::int64_t>(key, s));
            if (v.size() != kernel.dimension) throw ConfigError("'" + key + "' needs one bound per coordinate");
            return v;
        };
        region.box = Box{parse_bounds("lo"), parse_bounds("hi")};
        for (std::size_t i = 0; i < kernel.dimension; ++i) {
            if (region.box.lo[i] > region.box.hi[i]) throw ConfigError("empty region: lo > hi");
        }
    }
    if (config.has("band_min") || config.has("band_max")) {
        const auto norm_name = config.get("band_norm", "max");
        if (norm_name != "max" && norm_name != "l1") throw ConfigError("band_norm must be max or l1");
        region.band = NormBand{norm_name == "max" ? Norm::Max : Norm::L1, config.get_int("band_min", 0),
                               config.get_int("band_max", 0)};
    }
    return region;
}

json report_json(const ScanReport& r) {
    json j;
    j["kind"] = r.kind;
    j["function"] = r.function;
    j["process"] = r.process;
    j["region"] = r.region;
    j["exceptional"] = r.exceptional;
    j["threshold"] = rational_json(r.threshold);
    j["states_scanned"] = r.states_scanned;
    j["exact_evaluations"] = r.exact_evaluations;
    j["violations"] = r.violations.size();
    j["max_violation_linf"] = r.max_violation_linf;
    j["max_violation_l1"] = r.max_violation_l1;
    j["verdict"] = to_string(r.verdict);
    j["note"] = r.note;
    if (r.kind == "transience") {
        j["inf_over_exceptional"] = r.inf_over_exceptional ? rational_json(*r.inf_over_exceptional) : json();
        j["witness"] = r.witness ? json(*r.witness) : json();
        j["witness_value"] = r.witness_value ? rational_json(*r.witness_value) : json();
        j["positive_on_region"] = r.positive_on_region;
    }
    return j;
}

void write_violations(const ExperimentConfig& e, const ScanReport& r, std::size_t dimension) {
    auto out = open_output(e, "scan_violations.csv");
    csv_preamble(out, e);
    for (std::size_t i = 0; i < dimension; ++i) out << 'x' << i + 1 << ',';
    out << "drift_exact,drift_approx\n";
    for (const auto& v : r.violations) {
        for (auto x : v.state) out << x << ',';
        out << to_string(v.drift) << ',' << format_double(v.drift.get_d()) << '\n';
    }
}

}  // namespace

int cmd_drift_scan(const Config& config) {
    const auto e = experiment_config_with(config, Interaction::A1, "zeta");
    if (e.target == "xi") throw ConfigError("drift scans run on zeta, eta, u or v");
    LinearKernel kernel;
    try {
        kernel = make_kernel(e.spec, parse_process(e.target));
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    LyapunovFn f;
    try {
        f = lyapunov_by_name(config.get("function", "quadratic"), kernel.dimension);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    ScanOptions options;
    options.float_filter = config.get_bool("float_filter", true);
    options.workers = config.get_uint("workers", 0);
    options.cap = config.get_int("cap", kDefaultExponentCap);

    const auto scan = config.get("scan", "ergodicity");
    const Rational default_epsilon = e.spec.beta < 1 ? Rational((1 - e.spec.beta) / 2) : Rational(1, 10);
    const auto epsilon = config.has("epsilon") ? config.get_rational("epsilon", "") : default_epsilon;
    if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
    auto j = json_header(config, e, "drift-scan");
    j["epsilon"] = to_string(epsilon);
    ScanReport report;
    if (scan == "ergodicity") {
        report = foster_ergodicity_scan(kernel, f, region_from(config, kernel), epsilon, options);
    } else if (scan == "transience") {
        const auto region = region_from(config, kernel);
        report = foster_transience_scan(kernel, f, exceptional_from(config.get("exceptional", "none"), kernel.dimension),
                                        region, options);
        if (std::holds_alternative<ReciprocalMax>(f.form) && e.spec.beta > 1) {
            // Radius of the smallest max-norm ball holding every state with positive drift.
            const auto positive = scan_drift(kernel, f, region, Rational(0), ExceptionalSet::none(), options);
            j["positive_drift_ball_radius"] = positive.max_violation_linf;
            j["proof_threshold"] = rational_json((e.spec.beta + 1) / (e.spec.beta - 1));
        }
    } else if (scan == "drift") {
        report = scan_drift(kernel, f, region_from(config, kernel), config.get_rational("threshold", "0"),
                            exceptional_from(config.get("exceptional", "none"), kernel.dimension), options);
    } else if (scan == "annulus") {
        const auto a = find_violation_free_annulus(kernel, f, epsilon,
                                                   config.get_int("annulus_width", 15),
                                                   config.get_int("search_radius", 100), options);
        j["annulus"] = {{"radius", a.radius}, {"width", a.width}, {"search_radius", a.search_radius}};
        report = a.band_report;
    } else {
        throw ConfigError("scan must be ergodicity, transience, drift or annulus");
    }
    j["report"] = report_json(report);
    write_json(e, "scan.json", j);
    write_violations(e, report, kernel.dimension);
    return report.verdict == Verdict::Pass ? kExitOk : kExitCheckFailed;
}

int cmd_verify_identity(const Config& config) {
    const auto beta = config.get_rational("beta", "9/10");
    if (!(beta > 0)) throw ConfigError("beta must be positive");
    const auto radius = config.get_int("radius", 15);
    if (radius < 0) throw ConfigError("radius must be nonnegative");
    const auto e = experiment_config_with(config, Interaction::A2, "zeta");

    auto out = open_output(e, "identity.csv");
    csv_preamble(out, e);
    out << "x1,x2,residual\n";
    std::uint64_t checked = 0, nonzero = 0;
    std::vector<std::int64_t> x(2);
    for (x[0] = -radius; x[0] <= radius; ++x[0]) {
        for (x[1] = -radius; x[1] <= radius; ++x[1]) {
            const auto res = exp_sum_identity_residual(beta, x);
            ++checked;
            if (res != 0) ++nonzero;
            out << x[0] << ',' << x[1] << ',' << to_string(res) << '\n';
        }
    }
    auto j = json_header(config, e, "verify-identity");
    j["beta"] = to_string(beta);
    j["radius"] = radius;
    j["states_checked"] = checked;
    j["nonzero_residuals"] = nonzero;
    j["verdict"] = nonzero == 0 ? "PASS" : "FAIL";
    write_json(e, "identity.json", j);
    return nonzero == 0 ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

namespace {

struct ClassifyRow {
    std::uint64_t seed = 0;
    std::optional<RecurrenceSummary> recurrence;
    std::optional<EscapeSummary> escape;
    std::uint64_t ties_half = 0, ties_total = 0, ties_after_burn_in = 0;
    std::optional<WindingSummary> winding;
    std::optional<WinnerRecord> winner;
    std::optional<ProfileSummary> profile;
    HeightState final_state;
};

}  // namespace

int cmd_classify(const Config& config) {
    const auto e = experiment_config(config);
    const auto names = config.get_list("classifiers", "recurrence,escape,ties");
    std::set<std::string> selected;
    for (const auto& n : names) {
        if (n != "recurrence" && n != "escape" && n != "ties" && n != "winding" && n != "winner" && n != "profile") {
            throw ConfigError("unknown classifier '" + n + "'");
        }
        selected.insert(n);
    }
    const bool want_rec = selected.count("recurrence"), want_esc = selected.count("escape"),
               want_ties = selected.count("ties"), want_wind = selected.count("winding"),
               want_win = selected.count("winner"), want_prof = selected.count("profile");
    if (want_wind && e.spec.sites != 3) throw ConfigError("the winding classifier needs a planar chain (sites = 3)");
    if (want_win && (e.spec.mode != Interaction::A3 || !(e.spec.beta > 1))) {
        throw ConfigError("the winner classifier needs mode A3 and beta > 1");
    }
    const auto T = e.horizon;
    const auto burn_in = config.get_uint("burn_in", default_burn_in(T));
    const auto escape_after = config.get_uint("escape_after", T / 10);
    const auto min_windows = config.get_uint("escape_min_windows", 3);
    const auto winner_window = config.get_uint("winner_window", T / 2);
    const auto tolerance = config.get_double("profile_tolerance", 0.25);
    if (want_win && winner_window == 0) throw ConfigError("winner_window must be positive");

    std::vector<ClassifyRow> rows(e.replicas);
    parallel_for(
        e.replicas,
        [&](std::size_t r) {
            ClassifyRow& row = rows[r];
            row.seed = e.seed(r);
            RecurrenceProbe rec(T, escape_after);
            EscapeProbe esc(burn_in, min_windows);
            TieCounter ties;
            WindingTracker wind(burn_in);
            std::optional<WinnerDetect> win;
            if (want_win) win.emplace(e.spec, T, winner_window);
            std::optional<AlternatingProfile> prof;
            if (want_prof) prof.emplace(e.spec.sites, T, tolerance);

            Chain chain(e.spec, e.initial, row.seed, e.sampling);
            std::vector<std::int64_t> z(e.spec.sites - 1);
            for (std::uint64_t t = 1; t <= T; ++t) {
                const auto site = chain.step();
                const auto& xi = chain.state();
                const auto last = xi[xi.size() - 1];
                for (std::size_t i = 0; i < z.size(); ++i) z[i] = xi[i] - last;
                if (want_rec) rec.observe(t, z);
                if (want_esc) esc.observe(t, z);
                if (want_ties) ties.observe(t, z);
                if (want_wind) wind.observe(t, z);
                if (win) win->observe(t, site);
                if (prof) prof->observe(t, site);
            }
            if (want_rec) row.recurrence = rec.summary();
            if (want_esc) row.escape = esc.summary();
            row.ties_half = ties.count_up_to(T / 2);
            row.ties_total = ties.count();
            row.ties_after_burn_in = ties.count_after(burn_in);
            if (want_wind) row.winding = wind.summary();
            if (win) row.winner = win->finish(chain.state());
            if (prof) row.profile = prof->summary();
            row.final_state = chain.state();
        },
        config.get_uint("workers", 0));

    auto out = open_output(e, "classify.csv");
    csv_preamble(out, e);
    out << "replica,seed";
    if (want_rec) out << ",recurrence,returns,mean_return_first_half,mean_return_second_half";
    if (want_esc) out << ",escape";
    if (want_ties) out << ",ties_half,ties_total,ties_after_burn_in";
    if (want_wind) out << ",winding,winding_clean,winding_violations,settled_crossings";
    if (want_win) out << ",winner,winner_k,winner_c,winner_ratio,winner_residual";
    if (want_prof) out << ",profile";
    out << '\n';

    auto j = json_header(config, e, "classify");
    j["burn_in"] = burn_in;
    j["records"] = json::array();
    std::map<std::string, std::uint64_t> tally;
    std::vector<double> residuals;
    std::uint64_t ties_half = 0, ties_total = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        json rec{{"config_hash", e.hash}, {"replica", r}, {"seed", row.seed}};
        out << r << ',' << row.seed;
        if (row.recurrence) {
            const auto& s = *row.recurrence;
            out << ',' << to_string(s.verdict) << ',' << s.returns << ',' << format_double(s.mean_first_half) << ','
                << format_double(s.mean_second_half);
            rec["recurrence"] = {{"verdict", to_string(s.verdict)},
                                 {"returns", s.returns},
                                 {"returns_first_half", s.returns_first_half},
                                 {"returns_second_half", s.returns_second_half},
                                 {"mean_return_time", s.mean_return_time},
                                 {"mean_first_half", s.mean_first_half},
                                 {"mean_second_half", s.mean_second_half},
                                 {"last_return", s.last_return ? json(*s.last_return) : json()}};
            ++tally["recurrence:" + std::string(to_string(s.verdict))];
        }
        if (row.escape) {
            const auto& s = *row.escape;
            out << ',' << to_string(s.verdict);
            json curve = json::array();
            for (const auto& w : s.windows) curve.push_back({w.start, w.end, w.min_sq_norm});
            rec["escape"] = {{"verdict", to_string(s.verdict)}, {"curve", curve}};
            ++tally["escape:" + std::string(to_string(s.verdict))];
        }
        if (want_ties) {
            out << ',' << row.ties_half << ',' << row.ties_total << ',' << row.ties_after_burn_in;
            rec["ties"] = {{"half", row.ties_half}, {"total", row.ties_total}, {"after_burn_in", row.ties_after_burn_in}};
            ties_half += row.ties_half;
            ties_total += row.ties_total;
            if (row.ties_after_burn_in == 0) ++tally["ties:none-after-burn-in"];
        }
        if (row.winding) {
            const auto& s = *row.winding;
            out << ',' << to_string(s.verdict) << ',' << (s.clean ? 1 : 0) << ',' << s.violations << ','
                << s.settled_crossings;
            std::string seq;
            for (const auto& c : s.crossings) seq += std::string(to_string(c.axis)) + (c.direction > 0 ? "+" : c.direction < 0 ? "-" : "?");
            rec["winding"] = {{"verdict", to_string(s.verdict)}, {"clean", s.clean}, {"violations", s.violations},
                              {"settled_crossings", s.settled_crossings}, {"e_radii", s.e_radii},
                              {"sequence", seq}};
            if (s.clean) ++tally["winding:clean"];
            ++tally["winding:" + std::string(to_string(s.verdict))];
        }
        if (row.winner) {
            const auto& w = *row.winner;
            const bool ok = w.verdict == WinnerVerdict::Resolved;
            out << ',' << to_string(w.verdict) << ',' << (ok ? std::to_string(w.k + 1) : "") << ','
                << (ok ? std::to_string(w.c) : "") << ',' << (ok ? format_double(w.ratio) : "") << ','
                << (ok ? format_double(w.residual) : "");
            rec["winner"] = {{"verdict", to_string(w.verdict)}};
            if (ok) {
                rec["winner"]["k"] = w.k + 1;
                rec["winner"]["c"] = w.c;
                rec["winner"]["ratio"] = w.ratio;
                rec["winner"]["residual"] = w.residual;
                residuals.push_back(w.residual);
            }
            ++tally["winner:" + std::string(to_string(w.verdict))];
        }
        if (row.profile) {
            out << ',' << to_string(row.profile->verdict);
            rec["profile"] = {{"verdict", to_string(row.profile->verdict)}, {"rates", row.profile->rates}};
            ++tally["profile:" + std::string(to_string(row.profile->verdict))];
        }
        out << '\n';
        rec["final_state"] = row.final_state.values;
        j["records"].push_back(rec);
    }
    json agg;
    for (const auto& [k, v] : tally) agg[k] = static_cast<double>(v) / static_cast<double>(rows.size());
    if (want_ties) {
        agg["ties_half_total"] = ties_half;
        agg["ties_total"] = ties_total;
        agg["ties_growth_ratio"] = ties_half ? json(static_cast<double>(ties_total) / static_cast<double>(ties_half)) : json();
    }
    if (want_win) {
        agg["residual_median"] = residuals.empty() ? json() : json(quantile(residuals, 0.5));
        agg["residual_q90"] = residuals.empty() ? json() : json(quantile(residuals, 0.9));
    }
    j["fractions"] = agg;
    write_json(e, "classify.json", j);
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_streamlines(const Config& config) {
    const auto e = experiment_config(config);
    std::vector<Point2> starts;
    if (config.has("starts")) {
        for (const auto& item : split(config.require("starts"), ';')) {
            const auto parts = split(item, ':');
            if (parts.size() != 2) throw ConfigError("starts must look like u:v;u:v");
            starts.push_back({parse_double("starts", parts[0]), parse_double("starts", parts[1])});
        }
    } else {
        for (const auto& u : config.get_list("grid_u", "0.5,1.5,2.5")) {
            for (const auto& v : config.get_list("grid_v", "0.5,1.5,2.5")) {
                starts.push_back({parse_double("grid_u", u), parse_double("grid_v", v)});
            }
        }
    }
    StreamlineOptions opt;
    opt.h = config.get_double("h", opt.h);
    opt.max_steps = config.get_uint("max_steps", opt.max_steps);
    opt.direction = static_cast<int>(config.get_int("direction", 1));
    opt.stop_at_singular = config.get_bool("stop_at_singular", false);
    opt.singular_tol = config.get_double("singular_tol", opt.singular_tol);
    opt.equilibrium_tol = config.get_double("equilibrium_tol", opt.equilibrium_tol);
    if (!(opt.h > 0)) throw ConfigError("h must be positive");
    if (opt.direction != 1 && opt.direction != -1) throw ConfigError("direction must be 1 or -1");

    auto out = open_output(e, "streamlines.csv");
    csv_preamble(out, e);
    out << "line,step,u,v\n";
    auto j = json_header(config, e, "streamlines");
    j["lines"] = json::array();
    j["skipped"] = json::array();
    std::size_t line = 0;
    for (const auto& s : starts) {
        if (!(s.u > 0) || !(s.v > 0) || s.v == 1.0) {
            j["skipped"].push_back({{"u", s.u}, {"v", s.v}, {"reason", s.v == 1.0 ? "singular start (v = 1)" : "outside the positive quadrant"}});
            continue;
        }
        const auto sl = integrate_streamline(s, opt);
        for (std::size_t i = 0; i < sl.points.size(); ++i) {
            out << line << ',' << i << ',' << format_double(sl.points[i].u) << ',' << format_double(sl.points[i].v) << '\n';
        }
        json crossings = json::array();
        for (const auto& c : sl.ray_crossings) crossings.push_back({{"step", c.step}, {"u", c.at.u}, {"v", c.at.v}, {"radius", c.radius}});
        j["lines"].push_back({{"line", line},
                              {"start", {s.u, s.v}},
                              {"initial_slope", s.v == 1.0 ? json() : json(vector_field(s.u, s.v))},
                              {"termination", to_string(sl.reason)},
                              {"points", sl.points.size()},
                              {"singular_crossings", sl.singular_crossings},
                              {"ray_crossings", crossings}});
        ++line;
    }
    write_json(e, "streamlines.json", j);
    return kExitOk;
}

int cmd_extreme(const Config& config) {
    const auto e = experiment_config_with(config, Interaction::A3, "xi");
    ExtremeMode mode;
    try {
        mode = parse_extreme_mode(config.get("extreme_mode", "MIN"));
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    const auto window = config.get_uint("window", 100);
    if (window == 0 || e.horizon < 2 * window) throw ConfigError("horizon must be at least twice the window");

    std::vector<AllocationHistory> runs(e.replicas);
    parallel_for(
        e.replicas, [&](std::size_t r) { runs[r] = simulate_extreme(e.spec, e.initial, e.horizon, mode, e.seed(r)); },
        config.get_uint("workers", 0));

    auto out = open_output(e, "extreme.csv");
    csv_preamble(out, e);
    out << "replica,seed,t,site\n";
    auto j = json_header(config, e, "extreme");
    j["extreme_mode"] = to_string(mode);
    if (mode == ExtremeMode::Max) j["note"] = "beta -> infinity: the support collapses onto the leading sites (trivial case)";
    j["records"] = json::array();
    std::map<std::string, std::uint64_t> tally;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (std::size_t t = 0; t < runs[r].sites.size(); ++t) {
            out << r << ',' << e.seed(r) << ',' << t + 1 << ',' << runs[r].sites[t] + 1 << '\n';
        }
        const auto support = detect_absorbing_support(runs[r].sites, e.spec.sites, window);
        std::vector<std::size_t> labels;
        for (auto s : support.support) labels.push_back(s + 1);
        j["records"].push_back({{"config_hash", e.hash},
                                {"replica", r},
                                {"seed", e.seed(r)},
                                {"support", labels},
                                {"verdict", to_string(support.verdict)},
                                {"final_state", runs[r].final_state.values}});
        ++tally[std::string(to_string(support.verdict))];
    }
    json fractions;
    for (const auto& [k, v] : tally) fractions[k] = static_cast<double>(v) / static_cast<double>(runs.size());
    j["fractions"] = fractions;
    write_json(e, "extreme.json", j);
    return kExitOk;
}

int run_command(std::string_view name, const Config& config) {
    try {
        if (name == "simulate") return cmd_simulate(config);
        if (name == "drift-scan") return cmd_drift_scan(config);
        if (name == "verify-identity") return cmd_verify_identity(config);
        if (name == "classify") return cmd_classify(config);
        if (name == "streamlines") return cmd_streamlines(config);
        if (name == "extreme") return cmd_extreme(config);
        std::cerr << "unknown command '" << name << "'\n";
        return kExitConfig;
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const ExponentCapError& ex) {
        std::cerr << "refused: " << ex.what() << "\n";
        return kExitRefused;
    } catch (const SingularityError& ex) {
        std::cerr << "refused: " << ex.what() << "\n";
        return kExitRefused;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitRefused;
    }
}

}  // namespace csa
