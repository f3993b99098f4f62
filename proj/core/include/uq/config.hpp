#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uq/mlp.hpp"
#include "uq/vos.hpp"

namespace uq {

// Flat key = value configuration with '#' comments. Every key has a
// documented default; unknown keys are rejected. Flag overrides and preset
// expansion happen before validation.
class RunConfig {
  public:
    RunConfig();  // all defaults

    // Throws ConfigError naming the offending key/value.
    void set(const std::string& key, const std::string& value);
    void load_file(const std::string& path);
    void apply_preset(const std::string& name);  // toy-baseline, toy-vos,
                                                 // toy-ln-vos, toy-mc10-ln-vos

    std::string get(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;
    std::vector<std::size_t> get_size_list(const std::string& key) const;

    // Full resolved key = value text, keys in canonical order.
    std::string resolved() const;
    void save_resolved(const std::string& path) const;

    static std::vector<std::string> preset_names();

    // Typed views over the flat keys.
    TrainConfig train_config() const;
    VosConfig vos_config() const;
    bool vos_enabled() const { return get_bool("vos.enabled"); }

  private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
};

}  // namespace uq
