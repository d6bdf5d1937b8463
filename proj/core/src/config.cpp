// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace twinlink::config {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (ss >> tok) {
        if (tok == "inf" || tok == "+inf")
            out.push_back(std::numeric_limits<double>::infinity());
        else
            out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    // Accepts space- or comma-separated values.
    std::string copy = s;
    for (auto& c : copy)
        if (c == ',') c = ' ';
    return parse_doubles(copy);
}

}  // namespace

IniFile IniFile::parse_string(const std::string& text) {
    IniFile ini;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config: malformed section at line " +
                                         std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            ini.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected key = value at line " +
                                     std::to_string(lineno));
        ini.data_[section].emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_string(buf.str());
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    const auto it = data_.find(section);
    if (it == data_.end()) return false;
    for (const auto& [k, v] : it->second)
        if (k == key) return true;
    return false;
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    const auto it = data_.find(section);
    if (it == data_.end()) return fallback;
    for (const auto& [k, v] : it->second)
        if (k == key) return v;
    return fallback;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    return std::stod(v);
}

int IniFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    return std::stoi(get(section, key, ""));
}

std::uint64_t IniFile::get_u64(const std::string& section, const std::string& key,
                               std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    return std::stoull(get(section, key, ""));
}

bool IniFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config: bad boolean '" + v + "' for " + section + "." + key);
}

std::vector<std::string> IniFile::get_all(const std::string& section,
                                          const std::string& key) const {
    std::vector<std::string> out;
    const auto it = data_.find(section);
    if (it == data_.end()) return out;
    for (const auto& [k, v] : it->second)
        if (k == key) out.push_back(v);
    return out;
}

namespace {

scene::SceneConfig parse_scene(const IniFile& ini) {
    scene::SceneConfig sc;
    if (ini.has("scene", "bs_position")) {
        const auto v = parse_doubles(ini.get("scene", "bs_position", ""));
        if (v.size() != 3) throw std::runtime_error("config: scene.bs_position needs 3 values");
        sc.bs_position = {v[0], v[1], v[2]};
    }
    sc.bs_boresight_azimuth =
        ini.get_double("scene", "bs_boresight_azimuth_deg",
                       sc.bs_boresight_azimuth / kDegToRad) * kDegToRad;
    sc.bs_downtilt =
        ini.get_double("scene", "bs_downtilt_deg", sc.bs_downtilt / kDegToRad) * kDegToRad;
    if (ini.has("scene", "extent")) {
        const auto v = parse_doubles(ini.get("scene", "extent", ""));
        if (v.size() != 2) throw std::runtime_error("config: scene.extent needs 2 values");
        sc.extent_width = v[0];
        sc.extent_depth = v[1];
    }
    sc.grid_cell = ini.get_double("scene", "grid_cell", sc.grid_cell);
    sc.ue_height = ini.get_double("scene", "ue_height", sc.ue_height);
    sc.carrier_hz = ini.get_double("scene", "carrier_hz", sc.carrier_hz);
    sc.sim_duration = ini.get_double("scene", "sim_duration", sc.sim_duration);
    sc.sample_period = ini.get_double("scene", "sample_period", sc.sample_period);
    sc.los_dropout_prob = ini.get_double("scene", "los_dropout_prob", sc.los_dropout_prob);
    sc.max_paths = ini.get_int("scene", "max_paths", sc.max_paths);
    sc.rng_seed = ini.get_u64("scene", "rng_seed", sc.rng_seed);

    // blocker = <id> <minx> <miny> <minz> <maxx> <maxy> <maxz> <loss_db>
    for (const auto& line : ini.get_all("scene", "blocker")) {
        std::stringstream ss(line);
        Blocker b;
        ss >> b.id;
        std::vector<double> v;
        double x;
        while (ss >> x) v.push_back(x);
        if (v.size() != 7)
            throw std::runtime_error("config: blocker needs id + 7 numbers: '" + line + "'");
        b.min_corner = {v[0], v[1], v[2]};
        b.max_corner = {v[3], v[4], v[5]};
        b.reflection_loss_db = v[6];
        sc.static_blockers.push_back(std::move(b));
    }

    // lane = <dx> <dy> <dz> <t0> <x0> <y0> <z0> [<t1> <x1> <y1> <z1> ...]
    // lane_periodic uses the same syntax and wraps time over the waypoint span.
    for (const auto key : {"lane", "lane_periodic"}) {
        for (const auto& line : ini.get_all("scene", key)) {
            const auto v = parse_doubles(line);
            if (v.size() < 3 + 8 || (v.size() - 3) % 4 != 0)
                throw std::runtime_error(
                    "config: lane needs 3 dims plus >= 2 (t x y z) waypoints: '" + line + "'");
            scene::Trajectory lane;
            lane.vehicle_blocker_dims = {v[0], v[1], v[2]};
            lane.periodic = std::string(key) == "lane_periodic";
            for (std::size_t i = 3; i + 3 < v.size(); i += 4)
                lane.waypoints.push_back({v[i], {v[i + 1], v[i + 2], v[i + 3]}});
            sc.lanes.push_back(std::move(lane));
        }
    }
    return sc;
}

models::NeuralConfig parse_neural(const IniFile& ini) {
    models::NeuralConfig nn;
    const auto convs = ini.get_all("neural", "conv");
    if (!convs.empty()) {
        nn.conv_stack.clear();
        for (const auto& line : convs) {
            const auto v = parse_doubles(line);
            if (v.size() != 3)
                throw std::runtime_error("config: neural.conv needs 'channels kernel stride'");
            nn.conv_stack.push_back({static_cast<int>(v[0]), static_cast<int>(v[1]),
                                     static_cast<int>(v[2])});
        }
    }
    if (ini.has("neural", "head")) {
        const auto v = parse_doubles(ini.get("neural", "head", ""));
        if (v.size() != 2) throw std::runtime_error("config: neural.head needs 2 widths");
        nn.head = {static_cast<int>(v[0]), static_cast<int>(v[1])};
    }
    nn.learning_rate = ini.get_double("neural", "learning_rate", nn.learning_rate);
    nn.batch_size = ini.get_int("neural", "batch_size", nn.batch_size);
    nn.max_epochs = ini.get_int("neural", "max_epochs", nn.max_epochs);
    nn.patience = ini.get_int("neural", "patience", nn.patience);
    nn.adam_beta1 = ini.get_double("neural", "adam_beta1", nn.adam_beta1);
    nn.adam_beta2 = ini.get_double("neural", "adam_beta2", nn.adam_beta2);
    nn.rng_seed = ini.get_u64("neural", "rng_seed", nn.rng_seed);
    const std::string red = ini.get("neural", "loss_reduction", "mean");
    if (red == "mean")
        nn.loss_reduction = aoi::Reduction::Mean;
    else if (red == "sum")
        nn.loss_reduction = aoi::Reduction::Sum;
    else
        throw std::runtime_error("config: neural.loss_reduction must be mean or sum");
    return nn;
}

ProtocolConfig parse_protocol(const IniFile& ini) {
    ProtocolConfig p;
    if (ini.has("protocol", "snr_sweep"))
        p.snr_sweep_db = parse_double_list(ini.get("protocol", "snr_sweep", ""));
    else
        for (double s = -15.0; s <= 30.0 + 1e-9; s += 5.0) p.snr_sweep_db.push_back(s);
    p.augment_snr_db = ini.get_double("protocol", "augment_snr_db", p.augment_snr_db);
    p.augment = ini.get_bool("protocol", "augment", p.augment);
    p.eval_snr_db = ini.get_double("protocol", "eval_snr_db", p.eval_snr_db);
    p.train_snr_db = ini.get_double("protocol", "train_snr_db", p.train_snr_db);
    if (ini.has("protocol", "gammas"))
        p.gammas = parse_double_list(ini.get("protocol", "gammas", ""));
    p.threshold = ini.get_double("protocol", "threshold", p.threshold);
    if (ini.has("protocol", "stage_times"))
        p.stage_times = parse_double_list(ini.get("protocol", "stage_times", ""));
    p.eval_window = ini.get_double("protocol", "eval_window", p.eval_window);
    if (ini.has("protocol", "pool")) {
        const auto v = parse_double_list(ini.get("protocol", "pool", ""));
        if (v.size() != 2) throw std::runtime_error("config: protocol.pool needs 2 values");
        p.pool_rows = static_cast<int>(v[0]);
        p.pool_cols = static_cast<int>(v[1]);
    }
    p.los_dropout_grid = ini.get_double("protocol", "los_dropout_grid", p.los_dropout_grid);
    if (ini.has("protocol", "los_dropout_veh"))
        p.los_dropout_veh = ini.get_double("protocol", "los_dropout_veh", 0.0);
    p.noise_seed = ini.get_u64("protocol", "noise_seed", p.noise_seed);
    p.split_seed = ini.get_u64("protocol", "split_seed", p.split_seed);
    p.finetune_max_epochs = ini.get_int("protocol", "finetune_max_epochs", 0);
    return p;
}

}  // namespace

ExperimentConfig experiment_config_from_ini(const IniFile& ini) {
    ExperimentConfig cfg;
    cfg.scene = parse_scene(ini);

    cfg.array.n_v = ini.get_int("array", "n_v", cfg.array.n_v);
    cfg.array.n_h = ini.get_int("array", "n_h", cfg.array.n_h);
    cfg.array.spacing_v = ini.get_double("array", "spacing_v", cfg.array.spacing_v);
    cfg.array.spacing_h = ini.get_double("array", "spacing_h", cfg.array.spacing_h);

    cfg.ofdm.f_c = ini.get_double("ofdm", "f_c", cfg.scene.carrier_hz);
    cfg.ofdm.bandwidth = ini.get_double("ofdm", "bandwidth", cfg.ofdm.bandwidth);
    cfg.ofdm.n_c = ini.get_int("ofdm", "n_c", cfg.ofdm.n_c);
    cfg.ofdm.symbol_power = ini.get_double("ofdm", "symbol_power", cfg.ofdm.symbol_power);

    cfg.neural = parse_neural(ini);

    cfg.aoi.gamma = ini.get_double("aoi", "gamma", cfg.aoi.gamma);
    cfg.aoi.threshold = ini.get_double("aoi", "threshold", cfg.aoi.threshold);

    cfg.perturb.enabled = ini.get_bool("features", "perturb", cfg.perturb.enabled);
    cfg.perturb.sigma_tau =
        ini.get_double("features", "perturb_sigma_tau_ns", cfg.perturb.sigma_tau * 1e9) * 1e-9;
    cfg.perturb.sigma_angle =
        ini.get_double("features", "perturb_sigma_angle_deg",
                       cfg.perturb.sigma_angle / kDegToRad) * kDegToRad;
    cfg.perturb.sigma_gain_db =
        ini.get_double("features", "perturb_sigma_gain_db", cfg.perturb.sigma_gain_db);
    cfg.perturb.rng_seed = ini.get_u64("features", "perturb_seed", cfg.perturb.rng_seed);
    const std::string mode = ini.get("features", "angle_spread_mode", "printed");
    if (mode == "printed")
        cfg.extract.angle_mode = features::AngleSpreadMode::Printed;
    else if (mode == "rms")
        cfg.extract.angle_mode = features::AngleSpreadMode::Rms;
    else
        throw std::runtime_error("config: features.angle_spread_mode must be printed or rms");

    cfg.protocol = parse_protocol(ini);

    // Pooled input shape is implied by array/ofdm/pool unless set explicitly.
    const int rows = cfg.array.n_v * cfg.array.n_h;
    if (rows % cfg.protocol.pool_rows != 0 || cfg.ofdm.n_c % cfg.protocol.pool_cols != 0)
        throw std::runtime_error("config: pool factors must divide the ADCPM shape");
    cfg.neural.input_rows = rows / cfg.protocol.pool_rows;
    cfg.neural.input_cols = cfg.ofdm.n_c / cfg.protocol.pool_cols;

    cfg.base_seed = cfg.scene.rng_seed;

    if (const char* env = std::getenv("TWINLINK_SEED")) {
        apply_seed_override(cfg, std::stoull(env));
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from_ini(IniFile::parse_file(path));
}

void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.base_seed = seed;
    cfg.scene.rng_seed = mix_seed(seed, 1);
    cfg.neural.rng_seed = mix_seed(seed, 2);
    cfg.protocol.noise_seed = mix_seed(seed, 3);
    cfg.protocol.split_seed = mix_seed(seed, 4);
    cfg.perturb.rng_seed = mix_seed(seed, 5);
}

}  // namespace twinlink::config
