// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_CONFIG_HPP
#define TWINLINK_CONFIG_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twinlink/aoi.hpp"
#include "twinlink/channel.hpp"
#include "twinlink/features.hpp"
#include "twinlink/nn.hpp"
#include "twinlink/scene.hpp"

namespace twinlink::config {

// Minimal INI reader: [section] headers, key = value lines, '#' or ';'
// comments. Repeated keys are preserved in order (blockers, lanes, conv).
class IniFile {
  public:
    static IniFile parse_file(const std::string& path);
    static IniFile parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

  private:
    // section -> ordered (key, value) pairs
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> data_;
};

// Experiment protocol knobs ([protocol] section).
struct ProtocolConfig {
    std::vector<double> snr_sweep_db;       // static experiment evaluation SNRs
    double augment_snr_db = 15.0;           // train-time augmentation SNR
    bool augment = true;                    // train an augmented variant too
    double eval_snr_db = std::numeric_limits<double>::infinity();  // drift eval
    double train_snr_db = std::numeric_limits<double>::infinity(); // drift fine-tune inputs
    std::vector<double> gammas = {0.01, 0.05, 0.1, 0.2, 0.4};
    double threshold = 0.005;               // age violation threshold
    std::vector<double> stage_times = {90.0, 190.0, 290.0};
    double eval_window = 10.0;              // test window length after each stage time
    int pool_rows = 4;
    int pool_cols = 4;
    double los_dropout_grid = 0.0;          // grid generation override
    std::optional<double> los_dropout_veh;  // vehicular override; default scene value
    std::uint64_t noise_seed = 7;
    std::uint64_t split_seed = 11;
    int finetune_max_epochs = 0;            // 0 keeps neural.max_epochs
};

struct ExperimentConfig {
    scene::SceneConfig scene;
    channel::ArrayConfig array;
    channel::OfdmConfig ofdm;
    models::NeuralConfig neural;
    aoi::AoiConfig aoi;
    features::PerturbConfig perturb;
    features::ExtractOptions extract;
    ProtocolConfig protocol;

    // Raw seed before any TWINLINK_SEED override, for reporting.
    std::uint64_t base_seed = 0;
};

// Parses the sectioned config file; angle keys ending in _deg are converted
// to radians. TWINLINK_SEED, when set, overrides every seed in the result.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_ini(const IniFile& ini);

// Applies the environment override; exposed for tests.
void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace twinlink::config

#endif  // TWINLINK_CONFIG_HPP
