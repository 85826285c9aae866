#include "dcs/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "dcs/errors.hpp"

namespace dcs {

namespace {

constexpr std::array<std::pair<Scenario, std::string_view>, 7> kScenarioNames{{
    {Scenario::fig2a, "fig2a"},
    {Scenario::fig2b, "fig2b"},
    {Scenario::fig2c, "fig2c"},
    {Scenario::fig2d, "fig2d"},
    {Scenario::fig4, "fig4"},
    {Scenario::readout, "readout"},
    {Scenario::custom, "custom"},
}};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Entry {
    std::string key;
    std::string value;
    int line;  // 0 for overrides
    std::string origin;
};

[[noreturn]] void fail(const Entry& e, const std::string& what) {
    if (e.line > 0) throw ConfigError(what, e.line);
    throw ConfigError(e.origin + ": " + what);
}

double to_double(const Entry& e) {
    double v = 0.0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        fail(e, "cannot parse '" + e.value + "' as a number for key '" + e.key + "'");
    return v;
}

double to_positive(const Entry& e) {
    const double v = to_double(e);
    if (!(v > 0.0)) fail(e, "key '" + e.key + "' must be > 0");
    return v;
}

std::size_t to_count(const Entry& e, std::size_t minimum) {
    std::size_t v = 0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) fail(e, "cannot parse '" + e.value + "' as an integer for key '" + e.key + "'");
    if (v < minimum) fail(e, "key '" + e.key + "' must be >= " + std::to_string(minimum));
    return v;
}

bool to_bool(const Entry& e) {
    const std::string& v = e.value;
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    fail(e, "key '" + e.key + "' expects on/off, got '" + v + "'");
}

template <class T>
T to_choice(const Entry& e, std::initializer_list<std::pair<std::string_view, T>> choices) {
    std::string valid;
    for (const auto& [name, value] : choices) {
        if (e.value == name) return value;
        valid += valid.empty() ? std::string(name) : ", " + std::string(name);
    }
    fail(e, "key '" + e.key + "' expects one of " + valid + ", got '" + e.value + "'");
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string format_complex(cplx z) { return format_double(z.real()) + (z.imag() < 0 ? "" : "+") + format_double(z.imag()) + "i"; }

// Keys that fix the qubit-cavity detuning; resolved after all other keys.
struct DetuningKeys {
    std::optional<Entry> lambda;
    std::optional<Entry> omega_q;
    std::optional<Entry> delta;
};

class Parser {
public:
    void apply(const Entry& e) {
        static const std::map<std::string, std::function<void(Parser&, const Entry&)>> handlers = {
            {"scenario", [](Parser& p, const Entry& e) { p.cfg.scenario = parse_scenario(e.value, e.line); }},
            {"g", [](Parser& p, const Entry& e) { p.cfg.g = to_positive(e); }},
            {"omega_c", [](Parser& p, const Entry& e) { p.cfg.omega_c = to_positive(e); }},
            {"lambda", [](Parser& p, const Entry& e) { p.detuning_entry(e, &DetuningKeys::lambda); }},
            {"omega_q", [](Parser& p, const Entry& e) { p.detuning_entry(e, &DetuningKeys::omega_q); }},
            {"delta", [](Parser& p, const Entry& e) { p.detuning_entry(e, &DetuningKeys::delta); }},
            {"epsilon", [](Parser& p, const Entry& e) { p.eps_abs = to_double(e); }},
            {"epsilon_phase", [](Parser& p, const Entry& e) { p.eps_phase = to_double(e); }},
            {"alpha_sq", [](Parser& p, const Entry& e) { p.cfg.alpha_sq = to_positive(e); }},
            {"drive_detuning", [](Parser& p, const Entry& e) { p.cfg.drive_detuning = to_double(e); }},
            {"duration", [](Parser& p, const Entry& e) { p.cfg.duration = to_positive(e); }},
            {"initial_qubit",
             [](Parser& p, const Entry& e) { p.cfg.initial_qubit = to_choice<Qubit>(e, {{"g", Qubit::g}, {"e", Qubit::e}}); }},
            {"n_max", [](Parser& p, const Entry& e) { p.cfg.n_max = to_count(e, 2); }},
            {"dt", [](Parser& p, const Entry& e) { p.cfg.dt = to_positive(e); }},
            {"phase_correction", [](Parser& p, const Entry& e) { p.cfg.phase_correction = to_bool(e); }},
            {"drive_form",
             [](Parser& p, const Entry& e) {
                 p.cfg.drive_form = to_choice<DriveForm>(e, {{"rwa", DriveForm::rwa}, {"cosine", DriveForm::cosine}});
             }},
            {"initial_state",
             [](Parser& p, const Entry& e) {
                 p.cfg.initial_state = to_choice<ExcitedInitial>(
                     e, {{"dressed", ExcitedInitial::dressed_e0}, {"bare", ExcitedInitial::bare_e0}});
             }},
            {"basis",
             [](Parser& p, const Entry& e) {
                 p.cfg.basis = to_choice<DressedVariant>(
                     e, {{"exact", DressedVariant::exact}, {"first_order", DressedVariant::first_order}});
             }},
            {"convergence", [](Parser& p, const Entry& e) { p.cfg.convergence = to_bool(e); }},
            {"eta", [](Parser& p, const Entry& e) { p.eta_abs = to_double(e); }},
            {"eta_phase", [](Parser& p, const Entry& e) { p.eta_phase = to_double(e); }},
            {"beta_sq", [](Parser& p, const Entry& e) { p.cfg.beta_sq = to_positive(e); }},
            {"qubit_omega", [](Parser& p, const Entry& e) { p.cfg.qubit_omega = to_positive(e); }},
            {"t_max", [](Parser& p, const Entry& e) { p.cfg.t_max = to_positive(e); }},
            {"samples", [](Parser& p, const Entry& e) { p.cfg.samples = to_count(e, 2); }},
            {"sweep", [](Parser& p, const Entry& e) { p.sweep_name = e; }},
            {"sweep_start", [](Parser& p, const Entry& e) { p.sweep_start = to_double(e); }},
            {"sweep_stop", [](Parser& p, const Entry& e) { p.sweep_stop = to_double(e); }},
            {"sweep_points", [](Parser& p, const Entry& e) { p.sweep_points = to_count(e, 1); }},
            {"out", [](Parser& p, const Entry& e) { p.cfg.out = e.value; }},
        };
        const auto it = handlers.find(e.key);
        if (it == handlers.end()) fail(e, "unknown key '" + e.key + "'");
        it->second(*this, e);
    }

    void begin_overrides() { in_overrides_ = true; }

    ScenarioConfig finish() {
        resolve_detuning();
        if (!(cfg.omega_q() > 0.0)) throw ConfigError("derived omega_q = omega_c + g/lambda must be > 0");
        // validates delta and lambda
        (void)cfg.params();
        cfg.epsilon = std::polar(eps_abs, eps_phase);
        if (eta_abs) cfg.eta = std::polar(*eta_abs, eta_phase);
        resolve_sweep();
        return cfg;
    }

    ScenarioConfig cfg;

private:
    void detuning_entry(const Entry& e, std::optional<Entry> DetuningKeys::*slot) {
        if (in_overrides_ && !overrode_detuning_) {
            detuning_ = {};
            overrode_detuning_ = true;
        }
        detuning_.*slot = e;
    }

    void resolve_detuning() {
        struct Candidate {
            const Entry* entry;
            double lambda;
        };
        std::vector<Candidate> given;
        if (detuning_.lambda) {
            const double lam = to_double(*detuning_.lambda);
            if (lam == 0.0 || !(std::abs(lam) < 1.0)) fail(*detuning_.lambda, "lambda must satisfy 0 < |lambda| < 1");
            given.push_back({&*detuning_.lambda, lam});
        }
        if (detuning_.omega_q) {
            const double wq = to_positive(*detuning_.omega_q);
            if (wq == cfg.omega_c) fail(*detuning_.omega_q, "omega_q equals omega_c: zero detuning is not dispersive");
            given.push_back({&*detuning_.omega_q, cfg.g / (wq - cfg.omega_c)});
        }
        if (detuning_.delta) {
            const double d = to_double(*detuning_.delta);
            if (d == 0.0) fail(*detuning_.delta, "delta = 0 is not dispersive");
            given.push_back({&*detuning_.delta, cfg.g / d});
        }
        if (given.empty()) return;
        for (std::size_t i = 1; i < given.size(); ++i) {
            if (std::abs(given[i].lambda - given[0].lambda) > 1e-9 * std::abs(given[0].lambda))
                fail(*given[i].entry, "'" + given[i].entry->key + "' is inconsistent with '" + given[0].entry->key +
                                          "' (implies lambda = " + format_double(given[i].lambda) + " vs " +
                                          format_double(given[0].lambda) + ")");
        }
        cfg.lambda = given[0].lambda;
    }

    void resolve_sweep() {
        const bool any = sweep_name || sweep_start || sweep_stop || sweep_points;
        if (!any) return;
        const Entry where = sweep_name ? *sweep_name : Entry{"sweep", "", 0, "sweep"};
        if (!sweep_name) fail(where, "sweep bounds given without 'sweep = <name>'");
        const std::string& name = sweep_name->value;
        if (name != "alpha_sq" && name != "lambda" && name != "epsilon")
            fail(where, "sweep must be one of alpha_sq, lambda, epsilon; got '" + name + "'");
        if (cfg.scenario == Scenario::fig4) fail(where, "fig4 is a time series and takes no sweep");
        Sweep s = cfg.effective_sweep();
        if (s.name != name) {
            if (!sweep_start || !sweep_stop) fail(where, "sweep over '" + name + "' needs sweep_start and sweep_stop");
            s = Sweep{name, *sweep_start, *sweep_stop, sweep_points.value_or(5)};
        } else {
            if (sweep_start) s.start = *sweep_start;
            if (sweep_stop) s.stop = *sweep_stop;
            if (sweep_points) s.points = *sweep_points;
        }
        if (s.points < 2 && s.start != s.stop) fail(where, "a sweep needs sweep_points >= 2");
        cfg.sweep = s;
    }

    DetuningKeys detuning_;
    bool in_overrides_ = false;
    bool overrode_detuning_ = false;
    double eps_abs = 0.05;
    double eps_phase = 0.0;
    std::optional<double> eta_abs;
    double eta_phase = 0.0;
    std::optional<Entry> sweep_name;
    std::optional<double> sweep_start;
    std::optional<double> sweep_stop;
    std::optional<std::size_t> sweep_points;
};

Entry split_assignment(std::string_view line, int line_no, const std::string& origin) {
    const auto eq = line.find('=');
    Entry e{"", "", line_no, origin};
    if (eq == std::string_view::npos) fail(e, "expected key = value");
    e.key = std::string(trim(line.substr(0, eq)));
    e.value = std::string(trim(line.substr(eq + 1)));
    if (e.key.empty()) fail(e, "missing key before '='");
    if (e.value.empty()) fail(e, "missing value for key '" + e.key + "'");
    return e;
}

}  // namespace

std::string_view to_string(Scenario s) {
    for (const auto& [value, name] : kScenarioNames)
        if (value == s) return name;
    return "unknown";
}

Scenario parse_scenario(std::string_view name, int line) {
    std::string valid;
    for (const auto& [value, n] : kScenarioNames) {
        if (n == name) return value;
        valid += valid.empty() ? std::string(n) : ", " + std::string(n);
    }
    throw ConfigError("unknown scenario '" + std::string(name) + "' (valid: " + valid + ")", line);
}

std::vector<double> Sweep::values() const {
    if (points <= 1) return {start};
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = i + 1 == points ? stop : start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
    return out;
}

double ScenarioConfig::time_step() const { return dt.value_or(2.0 * std::numbers::pi / (50.0 * omega_q())); }

Sweep ScenarioConfig::effective_sweep() const {
    if (sweep) return *sweep;
    switch (scenario) {
        case Scenario::fig2a:
        case Scenario::fig2b:
            return {"alpha_sq", 1.0, 9.0, 9};
        case Scenario::fig2c:
            return {"lambda", 0.05, 0.2, 7};
        case Scenario::fig2d:
            return {"epsilon", 0.02, 0.1, 5};
        case Scenario::readout:
            return {"epsilon", std::abs(epsilon), std::abs(epsilon), 1};
        case Scenario::fig4:
        case Scenario::custom:
            break;
    }
    return {"alpha_sq", alpha_sq, alpha_sq, 1};
}

cplx ScenarioConfig::qubit_drive_amplitude() const { return eta.value_or(cplx(0.05 * omega_q())); }

double ScenarioConfig::qubit_drive_frequency() const {
    const double chi = g * lambda;
    return qubit_omega.value_or(omega_q() + chi * (2.0 * beta_sq + 2.0));
}

std::string ScenarioConfig::describe() const {
    std::ostringstream os;
    os << "g=" << format_double(g) << ", lambda=" << format_double(lambda) << ", omega_c=" << format_double(omega_c)
       << ", omega_q=" << format_double(omega_q()) << ", chi=" << format_double(g * lambda)
       << ", epsilon=" << format_complex(epsilon) << ", n_max=" << n_max << ", dt=" << format_double(time_step())
       << ", phase_correction=" << (phase_correction ? "on" : "off")
       << ", drive_form=" << (drive_form == DriveForm::rwa ? "rwa" : "cosine")
       << ", initial_state=" << (initial_state == ExcitedInitial::dressed_e0 ? "dressed" : "bare")
       << ", basis=" << (basis == DressedVariant::exact ? "exact" : "first_order");
    switch (scenario) {
        case Scenario::fig4:
            os << ", eta=" << format_complex(qubit_drive_amplitude()) << ", omega=" << format_double(qubit_drive_frequency())
               << ", beta_sq=" << format_double(beta_sq);
            break;
        case Scenario::custom:
            os << ", alpha_sq=" << format_double(alpha_sq) << ", initial_qubit=" << (initial_qubit == Qubit::g ? "g" : "e");
            if (drive_detuning) os << ", drive_detuning=" << format_double(*drive_detuning);
            if (duration) os << ", duration=" << format_double(*duration);
            break;
        default: {
            const Sweep s = effective_sweep();
            os << ", alpha_sq=" << format_double(alpha_sq) << ", sweep=" << s.name << ":" << format_double(s.start) << ":"
               << format_double(s.stop) << ":" << s.points;
        }
    }
    return os.str();
}

ScenarioConfig parse_config(std::string_view text, std::span<const std::string> overrides) {
    Parser parser;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        parser.apply(split_assignment(line, line_no, "config"));
    }
    parser.begin_overrides();
    for (const auto& o : overrides) parser.apply(split_assignment(trim(o), 0, "override '" + o + "'"));
    return parser.finish();
}

ScenarioConfig load_config(const std::string& path, std::span<const std::string> overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

}  // namespace dcs
