#include "mivs/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace mivs {

namespace {

// Registry of every known key with its default value, in serialization order.
struct KeyDefault {
    const char* key;
    const char* value;
};

const KeyDefault kRegistry[] = {
    {"signal.fs_hz", "4000"},
    {"signal.f0_hz", "60"},
    {"signal.i_load_ka", "0.3"},
    {"signal.i_nom_ka", "0.5"},
    {"signal.i_lim_pu", "1.5"},
    {"signal.z1", "0.1"},
    {"signal.z2", "0.1"},
    {"signal.z_line", "0.05"},
    {"signal.z_base_ohm", "100"},
    {"signal.psi_deg", "-80"},
    {"signal.tau_ac_s", "0.02"},
    {"signal.tau_dc_s", "0.001"},
    {"signal.ripple_pu", "0"},
    {"relay.i_d_ka", "0.05"},
    {"relay.i_b_ka", "0.585"},
    {"relay.m1", "0.2"},
    {"relay.m2", "0.4"},
    {"relay.eta", "0.2"},
    {"relay.mag_window_s", "0"}, // 0 = kind default (one cycle AC, 2 ms DC)
    {"dataset.kind", "ac"},
    {"dataset.faults", "1000"},
    {"dataset.attacks", "1000"},
    {"dataset.seed", "42"},
    {"dataset.window_ms", "0"}, // 0 = kind default (10 ms AC, 4 ms DC)
    {"dataset.duration_s", "0.2"},
    {"dataset.t_event_s", "0.1"},
    {"dataset.line_name", ""},
    {"dataset.threads", "1"},
    {"dataset.train_fraction", "0.8"},
    {"dataset.load_jitter", "0.3"},
    {"train.lr", "0.001"},
    {"train.batch", "32"},
    {"train.epochs", "100"},
    {"train.patience", "10"},
    {"train.val_fraction", "0.1"},
    {"train.seed", "42"},
    {"train.clip_norm", "5"},
    {"train.hidden1", "16"},
    {"train.hidden2", "16"},
    {"train.hidden3", "16"},
    {"train.dense1", "0"}, // 0 = auto-size toward the parameter budget
    {"train.dense2", "32"},
    {"train.head", "flatten"},
    {"train.i_nom_ka", "0"}, // 0 = use signal.i_nom_ka
    {"attack.strategy", "scale"},
    {"attack.explicit", "0"}, // 1: apply alpha/delta/shift as given instead of crafting
    {"attack.alpha", "1"},
    {"attack.delta_ka", "0"},
    {"attack.shift_ms", "0"},
    {"attack.channels", ""},
    {"attack.alpha_bound", "10"},
    {"attack.delta_bound_pu", "10"},
    {"attack.rel_tol", "0.001"},
    {"attack.grid_points", "64"},
    {"eval.noise_snr_db", "0"}, // 0 = no noise
    {"eval.noise_seed", "7"},
    {"eval.per_line", "0"},
    {"eval.roc", "0"},
    {"bench.iters", "1000"},
    {"bench.seed", "1"},
};

bool known_key(const std::string& key) {
    for (const auto& kd : kRegistry)
        if (key == kd.key) return true;
    return false;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    for (const auto& kd : kRegistry) c.values_[kd.key] = kd.value;
    if (const char* env = std::getenv("MIVS_SEED")) {
        c.values_["dataset.seed"] = env;
        c.values_["train.seed"] = env;
    }
    return c;
}

void RunConfig::merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (section.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": key outside any [section]");
        set(section + "." + key, value);
    }
}

void RunConfig::set(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like section.key=value: " + assignment);
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!known_key(key)) throw std::invalid_argument("unknown config key: " + key);
    values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("unknown config key: " + key);
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string& s = get(key);
    double v;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument("config key " + key + " is not a number: '" + s + "'");
    return v;
}

int RunConfig::get_int(const std::string& key) const {
    double v = get_double(key);
    auto i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw std::invalid_argument("config key " + key + " is not an integer");
    return i;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const std::string& s = get(key);
    std::uint64_t v;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument("config key " + key + " is not an unsigned integer: '" + s + "'");
    return v;
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string& s = get(key);
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    throw std::invalid_argument("config key " + key + " is not a boolean: '" + s + "'");
}

std::string RunConfig::serialize() const {
    std::string out;
    std::string section;
    for (const auto& kd : kRegistry) {
        std::string key = kd.key;
        auto dot = key.find('.');
        std::string sec = key.substr(0, dot);
        if (sec != section) {
            if (!out.empty()) out += "\n";
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += key.substr(dot + 1) + " = " + values_.at(key) + "\n";
    }
    return out;
}

void RunConfig::echo_to(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config echo: " + path);
    out << serialize();
}

} // namespace mivs
