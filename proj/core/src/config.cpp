#include "uq/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "uq/error.hpp"

namespace uq {

namespace {

struct KeyDefault {
    const char* key;
    const char* value;
};

// Canonical key set; the order here is the order of the resolved dump.
const KeyDefault kDefaults[] = {
    {"seed", "7"},
    {"threads", "1"},
    {"data.kind", "toy"},        // toy | csv
    {"data.path", ""},           // feature CSV when data.kind = csv
    {"toy.classes", "5"},
    {"toy.per_class", "200"},
    {"toy.radius", "4"},
    {"split.fraction", "0.8"},
    {"ood.kind", "uniform"},     // uniform | csv | none
    {"ood.path", ""},
    {"ood.n", "400"},
    {"ood.lo", "-9"},
    {"ood.hi", "9"},
    {"model.hidden", "64,64"},
    {"model.dropout", "0.1"},
    {"train.epochs", "100"},
    {"train.batch", "128"},
    {"train.lr", "0.1"},
    {"train.schedule", "cosine"},  // cosine | step
    {"train.milestones", "80,140"},
    {"train.momentum", "0.9"},
    {"train.weight_decay", "0.0005"},
    {"train.loss", "ce"},        // ce | logitnorm
    {"train.tau", "0.04"},
    {"train.beta", "0.1"},
    {"vos.enabled", "false"},
    {"vos.warmup", "10"},
    {"vos.epsilon", "0.05"},
    {"vos.candidates", "10000"},
    {"vos.bank", "1000"},
    {"vos.momentum", "0.9"},
    {"vos.floor", "1e-06"},
    {"eval.stochastic", "true"},
    {"eval.passes", "10"},
    {"eval.seed", "1234"},
    {"eval.w_mi", "0.5"},
    {"eval.w_energy", "0.5"},
    {"eval.bins", "40"},
    {"map.lo", "-9"},
    {"map.hi", "9"},
    {"map.resolution", "120"},
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig::RunConfig() {
    for (const auto& kv : kDefaults) {
        values_[kv.key] = kv.value;
        order_.push_back(kv.key);
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    it->second = value;
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + t + "'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        try {
            set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void RunConfig::apply_preset(const std::string& name) {
    const auto apply = [&](std::initializer_list<std::pair<const char*, const char*>> kvs) {
        for (const auto& [k, v] : kvs) set(k, v);
    };
    if (name == "toy-baseline") {
        apply({{"model.hidden", "64"},
               {"vos.enabled", "false"},
               {"train.beta", "0"},
               {"train.loss", "ce"},
               {"train.schedule", "cosine"},
               {"train.epochs", "100"},
               {"eval.stochastic", "false"}});
    } else if (name == "toy-vos") {
        apply({{"model.hidden", "64"},
               {"vos.enabled", "true"},
               {"train.beta", "0.1"},
               {"train.loss", "ce"},
               {"train.schedule", "cosine"},
               {"train.epochs", "100"},
               {"eval.stochastic", "false"}});
    } else if (name == "toy-ln-vos") {
        apply({{"model.hidden", "64"},
               {"vos.enabled", "true"},
               {"train.beta", "0.1"},
               {"train.loss", "logitnorm"},
               {"train.schedule", "step"},
               {"train.epochs", "200"},
               {"eval.stochastic", "false"}});
    } else if (name == "toy-mc10-ln-vos") {
        apply({{"model.hidden", "64"},
               {"vos.enabled", "true"},
               {"train.beta", "0.1"},
               {"train.loss", "logitnorm"},
               {"train.schedule", "step"},
               {"train.epochs", "200"},
               {"eval.stochastic", "true"},
               {"eval.passes", "10"}});
    } else {
        throw ConfigError("unknown preset '" + name + "' (available: toy-baseline, toy-vos, "
                          "toy-ln-vos, toy-mc10-ln-vos)");
    }
}

std::vector<std::string> RunConfig::preset_names() {
    return {"toy-baseline", "toy-vos", "toy-ln-vos", "toy-mc10-ln-vos"};
}

std::string RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string s = get(key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError("key '" + key + "': '" + s + "' is not a number");
    }
    return v;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
    const std::string s = get(key);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
    }
    return v;
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string s = get(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("key '" + key + "': '" + s + "' is not a boolean");
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
    const std::string s = get(key);
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        int v = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
            throw ConfigError("key '" + key + "': '" + item + "' is not an integer");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<std::size_t> RunConfig::get_size_list(const std::string& key) const {
    std::vector<std::size_t> out;
    for (int v : get_int_list(key)) {
        if (v <= 0) {
            throw ConfigError("key '" + key + "': entries must be positive");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::string RunConfig::resolved() const {
    std::ostringstream out;
    for (const auto& key : order_) {
        out << key << " = " << values_.at(key) << "\n";
    }
    return out.str();
}

void RunConfig::save_resolved(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write resolved config '" + path + "'");
    }
    out << resolved();
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.epochs = static_cast<int>(get_int("train.epochs"));
    t.batch_size = static_cast<int>(get_int("train.batch"));
    t.initial_lr = get_double("train.lr");
    const std::string sched = get("train.schedule");
    if (sched == "cosine") {
        t.schedule = ScheduleKind::cosine;
    } else if (sched == "step") {
        t.schedule = ScheduleKind::step;
    } else {
        throw ConfigError("key 'train.schedule': '" + sched + "' is not cosine|step");
    }
    t.milestones = get_int_list("train.milestones");
    t.momentum = get_double("train.momentum");
    t.weight_decay = get_double("train.weight_decay");
    const std::string loss = get("train.loss");
    if (loss == "ce") {
        t.loss = LossKind::cross_entropy;
    } else if (loss == "logitnorm") {
        t.loss = LossKind::logit_norm;
    } else {
        throw ConfigError("key 'train.loss': '" + loss + "' is not ce|logitnorm");
    }
    t.tau = get_double("train.tau");
    t.beta = get_double("train.beta");
    t.seed = static_cast<std::uint64_t>(get_int("seed"));
    if (t.epochs < 0) throw ConfigError("key 'train.epochs': must be >= 0");
    if (t.batch_size < 1) throw ConfigError("key 'train.batch': must be >= 1");
    if (!(t.tau > 0.0)) throw ConfigError("key 'train.tau': must be > 0");
    if (t.beta < 0.0) throw ConfigError("key 'train.beta': must be >= 0");
    return t;
}

VosConfig RunConfig::vos_config() const {
    VosConfig v;
    v.warmup_epochs = static_cast<int>(get_int("vos.warmup"));
    v.epsilon = get_double("vos.epsilon");
    if (!(v.epsilon > 0.0 && v.epsilon <= 1.0)) {
        throw ConfigError("key 'vos.epsilon': must lie in (0, 1]");
    }
    v.candidates = static_cast<int>(get_int("vos.candidates"));
    const auto bank = get_int("vos.bank");
    if (bank < 1) throw ConfigError("key 'vos.bank': must be >= 1");
    v.bank_capacity = static_cast<std::size_t>(bank);
    v.running_mean_momentum = get_double("vos.momentum");
    v.energy_floor = get_double("vos.floor");
    if (v.candidates < 1) throw ConfigError("key 'vos.candidates': must be >= 1");
    return v;
}

}  // namespace uq
