// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors
//
// twinlink CLI: dataset generation, feature/ADCPM dumps, AoI pruning,
// training and the static / drift experiment drivers.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "twinlink/aoi.hpp"
#include "twinlink/channel.hpp"
#include "twinlink/config.hpp"
#include "twinlink/dataset_io.hpp"
#include "twinlink/features.hpp"
#include "twinlink/harness.hpp"
#include "twinlink/metrics.hpp"
#include "twinlink/nn.hpp"
#include "twinlink/transform.hpp"

namespace {

using namespace twinlink;

config::ExperimentConfig load_cfg(const std::string& path) {
    if (path.empty()) {
        config::IniFile empty = config::IniFile::parse_string("");
        return config::experiment_config_from_ini(empty);
    }
    return config::load_experiment_config(path);
}

double parse_snr(const std::string& s) {
    if (s == "inf" || s == "+inf" || s == "none") return std::numeric_limits<double>::infinity();
    return std::stod(s);
}

std::pair<int, int> parse_pair(const std::string& s, const std::string& what) {
    int a = 0, b = 0;
    char comma = 0;
    std::istringstream is(s);
    if (!(is >> a >> comma >> b) || comma != ',')
        throw CLI::ValidationError(what + " expects 'A,B'");
    return {a, b};
}

int cmd_gen(const std::string& config_path, const std::string& out, bool vehicular) {
    const auto cfg = load_cfg(config_path);
    const auto res = vehicular ? scene::generate_vehicular_dataset(cfg.scene)
                               : scene::generate_grid_dataset(cfg.scene);
    io::write_dataset_file(out, res.samples);
    std::cout << "wrote " << res.samples.size() << " samples to " << out
              << " (dropped " << res.dropped_no_paths;
    if (vehicular) std::cout << ", outside extent " << res.skipped_outside_extent;
    std::cout << ")\n";
    return 0;
}

int cmd_adcpm(const std::string& config_path, const std::string& in, const std::string& out,
              const std::string& snr, const std::string& pool) {
    const auto cfg = load_cfg(config_path);
    const auto samples = io::read_dataset_file(in);
    const double snr_db = parse_snr(snr);
    int pr = 1, pc = 1;
    if (!pool.empty()) std::tie(pr, pc) = parse_pair(pool, "--pool");

    const auto dft = transform::build_dft(cfg.array.n_v, cfg.array.n_h, cfg.ofdm.n_c);
    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + out + "'");
    for (const auto& s : samples) {
        auto h = channel::sfcrm(s.paths, cfg.array, cfg.ofdm);
        if (!std::isinf(snr_db)) {
            channel::NoiseModel noise;
            noise.snr_db = snr_db;
            noise.rng_seed = mix_seed(cfg.protocol.noise_seed, std::hash<std::string>{}(s.id));
            h = channel::add_awgn(h, noise, cfg.ofdm);
        }
        auto p = transform::adcpm({h}, dft);
        if (pr > 1 || pc > 1) p = transform::maxpool(p, pr, pc);
        nlohmann::ordered_json j;
        j["id"] = s.id;
        j["shape"] = {p.entries.rows(), p.entries.cols()};
        if (p.pooled_by)
            j["pooled"] = {p.pooled_by->first, p.pooled_by->second};
        else
            j["pooled"] = nullptr;
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(p.entries.size()));
        for (Eigen::Index r = 0; r < p.entries.rows(); ++r)
            for (Eigen::Index c = 0; c < p.entries.cols(); ++c) flat.push_back(p.entries(r, c));
        j["p"] = std::move(flat);
        os << j.dump() << '\n';
    }
    std::cout << "wrote " << samples.size() << " ADCPM records to " << out << "\n";
    return 0;
}

int cmd_speedup(const std::string& old_dims, const std::string& new_dims) {
    const auto [r0, c0] = parse_pair(old_dims, "--old");
    const auto [r1, c1] = parse_pair(new_dims, "--new");
    if (r1 <= 0 || c1 <= 0 || r0 % r1 != 0 || c0 % c1 != 0)
        throw CLI::ValidationError("--new must divide --old componentwise");
    const auto factor = transform::speedup_from_reduction(
        static_cast<std::uint64_t>(r0 / r1), static_cast<std::uint64_t>(c0 / c1));
    std::cout << factor << "\n";
    return 0;
}

int cmd_features(const std::string& config_path, const std::string& in, const std::string& out,
                 bool perturb) {
    const auto cfg = load_cfg(config_path);
    const auto samples = io::read_dataset_file(in);
    std::vector<features::FeatureVector> feats;
    feats.reserve(samples.size());
    features::PerturbConfig pc = cfg.perturb;
    pc.enabled = perturb;
    for (const auto& s : samples) {
        const auto paths =
            perturb ? features::perturb_paths(s.paths, pc, std::hash<std::string>{}(s.id))
                    : s.paths;
        feats.push_back(features::extract_features(paths, cfg.extract));
    }
    features::write_feature_csv(out, samples, feats);
    std::cout << "wrote " << feats.size() << " feature rows to " << out << "\n";
    return 0;
}

int cmd_prune(const std::string& in, const std::string& out, double t_now, double gamma,
              double threshold) {
    const auto samples = io::read_dataset_file(in);
    aoi::AoiConfig cfg;
    cfg.gamma = gamma;
    cfg.threshold = threshold;
    const auto res = aoi::prune(samples, t_now, cfg);
    io::write_dataset_file(out, res.retained);
    std::cout << "retained " << res.n_retained << ", dropped " << res.n_dropped << " -> " << out
              << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data, const std::string& out,
              const std::string& snr) {
    const auto cfg = load_cfg(config_path);
    const auto samples = io::read_dataset_file(data);
    const auto split = harness::split_by_ratio(samples, cfg.protocol.split_seed);
    harness::InputPipeline pipeline(cfg.array, cfg.ofdm, cfg.protocol.pool_rows,
                                    cfg.protocol.pool_cols, cfg.protocol.noise_seed);
    const double snr_db = parse_snr(snr);
    const auto train_set = pipeline.build(split.train, snr_db);
    const auto val_set = pipeline.build(split.val, snr_db);
    const auto state = models::train(cfg.neural, train_set, val_set, std::nullopt, nullptr, data);
    models::save_checkpoint(out, state);
    std::cout << "trained " << state.epochs_trained << " epochs on " << split.train.size()
              << " samples; checkpoint " << out << "\n";
    return 0;
}

int cmd_finetune(const std::string& config_path, const std::string& from, const std::string& data,
                 const std::string& out, double t_now, double gamma, double threshold,
                 std::optional<double> age_ref) {
    const auto cfg = load_cfg(config_path);
    const auto prev = models::load_checkpoint(from);
    const auto samples = io::read_dataset_file(data);

    aoi::AoiConfig acfg;
    acfg.gamma = gamma;
    acfg.threshold = threshold;
    const auto pruned = aoi::prune(samples, t_now, acfg);
    if (pruned.retained.empty()) throw std::runtime_error("finetune: pruning retained nothing");

    const auto split = harness::split_by_ratio(pruned.retained, cfg.protocol.split_seed);
    harness::InputPipeline pipeline(cfg.array, cfg.ofdm, cfg.protocol.pool_rows,
                                    cfg.protocol.pool_cols, cfg.protocol.noise_seed);
    const double ref = age_ref.value_or(t_now);
    const auto train_set =
        pipeline.build(split.train, cfg.protocol.train_snr_db, ref);
    const auto val_set = pipeline.build(split.val, cfg.protocol.train_snr_db);

    models::NeuralConfig ft = prev.config;
    if (cfg.protocol.finetune_max_epochs > 0) ft.max_epochs = cfg.protocol.finetune_max_epochs;
    const auto state = models::train(ft, train_set, val_set, acfg, &prev, data);
    models::save_checkpoint(out, state);
    std::cout << "fine-tuned on " << split.train.size() << " of " << samples.size()
              << " samples (pruned " << pruned.n_dropped << "); checkpoint " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& config_path, const std::string& model_path,
             const std::string& data, const std::string& snr) {
    const auto cfg = load_cfg(config_path);
    const auto state = models::load_checkpoint(model_path);
    const auto samples = io::read_dataset_file(data);
    harness::InputPipeline pipeline(cfg.array, cfg.ofdm, cfg.protocol.pool_rows,
                                    cfg.protocol.pool_cols, cfg.protocol.noise_seed);
    const auto set = pipeline.build(samples, parse_snr(snr));

    models::Predictor predictor(state);
    const auto preds = predictor.predict(set.inputs);
    std::vector<int> hard;
    std::vector<double> scores;
    for (const auto& p : preds) {
        hard.push_back(p.prob >= 0.5 ? 1 : 0);
        scores.push_back(p.logit);
    }
    const auto conf = metrics::confusion(hard, set.labels);
    std::cout << "n=" << conf.total() << " accuracy=" << conf.accuracy() << " tp=" << conf.tp
              << " fp=" << conf.fp << " tn=" << conf.tn << " fn=" << conf.fn << "\n";
    try {
        const auto roc = metrics::roc_auc(scores, set.labels);
        std::cout << "auc=" << roc.auc << "\n";
    } catch (const std::exception&) {
        std::cout << "auc=n/a (single-class labels)\n";
    }
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, double fault) {
    models::NeuralConfig cfg;
    cfg.input_rows = 6;
    cfg.input_cols = 8;
    cfg.conv_stack = {{2, 3, 2}};
    cfg.head = {6, 4};
    const auto res = models::gradient_check(cfg, seed, 1e-4, fault);
    std::cout << "params=" << res.param_count << " max_rel_error=" << res.max_rel_error << "\n";
    return res.max_rel_error <= 1e-6 ? 0 : 1;
}

int cmd_roc(const std::string& scores_path, const std::string& out) {
    std::ifstream is(scores_path);
    if (!is) throw std::runtime_error("cannot open '" + scores_path + "'");
    std::vector<double> scores;
    std::vector<int> labels;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line.rfind("score", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        scores.push_back(std::stod(line.substr(0, comma)));
        labels.push_back(std::stoi(line.substr(comma + 1)));
    }
    const auto roc = metrics::roc_auc(scores, labels);
    std::cout << "n=" << scores.size() << " auc=" << roc.auc << "\n";
    if (!out.empty()) {
        std::ofstream os(out, std::ios::binary);
        os << "fpr,tpr,threshold\n";
        os.precision(17);
        for (const auto& p : roc.points)
            os << p.fpr << ',' << p.tpr << ',' << p.threshold << '\n';
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"twinlink: desk-scale network digital twin for link blockage detection"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path, snr = "inf", pool, old_dims, new_dims;
    std::string model_path, scores_path, perturb = "off";
    double t_now = 0.0, gamma = 0.1, threshold = 0.005;
    double fault = 1.0;
    std::optional<double> age_ref;
    std::uint64_t seed = 1;
    std::string gammas_csv, threshold_str;

    auto* gen_grid = app.add_subcommand("gen-grid", "Generate the grid dataset");
    gen_grid->add_option("--config", config_path, "Scene config file")->required();
    gen_grid->add_option("--out", out_path, "Output JSONL")->required();

    auto* gen_veh = app.add_subcommand("gen-veh", "Generate the vehicular dataset");
    gen_veh->add_option("--config", config_path, "Scene config file")->required();
    gen_veh->add_option("--out", out_path, "Output JSONL")->required();

    auto* adcpm = app.add_subcommand("adcpm", "Dump ADCPM matrices for a dataset");
    adcpm->add_option("--in", in_path, "Dataset JSONL")->required();
    adcpm->add_option("--out", out_path, "Output JSONL")->required();
    adcpm->add_option("--snr", snr, "SNR in dB, or inf");
    adcpm->add_option("--pool", pool, "Max-pool factors 'a,b'");
    adcpm->add_option("--config", config_path, "Config file for array/OFDM");

    auto* speedup = app.add_subcommand("speedup", "Speedup factor of a resolution reduction");
    speedup->add_option("--old", old_dims, "Original dims 'R,C'")->required();
    speedup->add_option("--new", new_dims, "Reduced dims 'r,c'")->required();

    auto* feats = app.add_subcommand("features", "Dump the SML feature CSV");
    feats->add_option("--in", in_path, "Dataset JSONL")->required();
    feats->add_option("--out", out_path, "Output CSV")->required();
    feats->add_option("--perturb", perturb, "on|off estimation-error perturbation");
    feats->add_option("--config", config_path, "Config file");

    auto* prune = app.add_subcommand("prune", "Age-violation pruning of a dataset");
    prune->add_option("--in", in_path, "Dataset JSONL")->required();
    prune->add_option("--out", out_path, "Output JSONL")->required();
    prune->add_option("--t-now", t_now, "Current time, s")->required();
    prune->add_option("--gamma", gamma, "Decay rate, 1/s")->required();
    prune->add_option("--threshold", threshold, "Age violation threshold")->required();

    auto* train = app.add_subcommand("train", "Train the neural model (70/20/10 split)");
    train->add_option("--config", config_path, "Config file")->required();
    train->add_option("--data", in_path, "Dataset JSONL")->required();
    train->add_option("--out", out_path, "Checkpoint path")->required();
    train->add_option("--snr", snr, "Training input SNR in dB, or inf");

    auto* finetune = app.add_subcommand("finetune", "AoI-weighted fine-tuning from a checkpoint");
    finetune->add_option("--from", model_path, "Warm-start checkpoint")->required();
    finetune->add_option("--config", config_path, "Config file")->required();
    finetune->add_option("--data", in_path, "Dataset JSONL")->required();
    finetune->add_option("--out", out_path, "Output checkpoint")->required();
    finetune->add_option("--t-now", t_now, "Pruning time, s")->required();
    finetune->add_option("--gamma", gamma, "Decay rate, 1/s")->required();
    finetune->add_option("--threshold", threshold, "Age violation threshold");
    finetune->add_option("--age-ref", age_ref, "Loss age reference time (default --t-now)");

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval->add_option("--model", model_path, "Checkpoint path")->required();
    eval->add_option("--config", config_path, "Config file")->required();
    eval->add_option("--data", in_path, "Dataset JSONL")->required();
    eval->add_option("--snr", snr, "Evaluation SNR in dB, or inf");

    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
    gradcheck->add_option("--seed", seed, "RNG seed");
    gradcheck->add_option("--fault", fault, "Fault-injection scale for one gradient entry");

    auto* run_static = app.add_subcommand("run-static", "Static-scene experiment");
    run_static->add_option("--config", config_path, "Config file")->required();
    run_static->add_option("--out", out_path, "Output directory")->required();

    auto* run_drift = app.add_subcommand("run-drift", "Drift / AoI fine-tuning protocol");
    run_drift->add_option("--config", config_path, "Config file")->required();
    run_drift->add_option("--out", out_path, "Output directory")->required();
    run_drift->add_option("--gammas", gammas_csv, "Comma-separated decay rates");
    run_drift->add_option("--threshold", threshold_str, "Age violation threshold");

    auto* roc = app.add_subcommand("roc", "ROC/AUC from a score,label CSV");
    roc->add_option("--scores", scores_path, "CSV with score,label rows")->required();
    roc->add_option("--out", out_path, "Optional roc.csv output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_grid->parsed()) return cmd_gen(config_path, out_path, false);
        if (gen_veh->parsed()) return cmd_gen(config_path, out_path, true);
        if (adcpm->parsed()) return cmd_adcpm(config_path, in_path, out_path, snr, pool);
        if (speedup->parsed()) return cmd_speedup(old_dims, new_dims);
        if (feats->parsed()) return cmd_features(config_path, in_path, out_path, perturb == "on");
        if (prune->parsed()) return cmd_prune(in_path, out_path, t_now, gamma, threshold);
        if (train->parsed()) return cmd_train(config_path, in_path, out_path, snr);
        if (finetune->parsed())
            return cmd_finetune(config_path, model_path, in_path, out_path, t_now, gamma,
                                threshold, age_ref);
        if (eval->parsed()) return cmd_eval(config_path, model_path, in_path, snr);
        if (gradcheck->parsed()) return cmd_gradcheck(seed, fault);
        if (run_static->parsed()) {
            auto cfg = config::load_experiment_config(config_path);
            const auto report = harness::run_static_experiment(cfg);
            harness::write_static_outputs(report, cfg, out_path);
            std::cout << "static experiment done: noiseless accuracy "
                      << report.neural_noiseless << "; outputs in " << out_path << "\n";
            return 0;
        }
        if (run_drift->parsed()) {
            auto cfg = config::load_experiment_config(config_path);
            if (!gammas_csv.empty()) {
                cfg.protocol.gammas.clear();
                std::stringstream ss(gammas_csv);
                std::string tok;
                while (std::getline(ss, tok, ',')) cfg.protocol.gammas.push_back(std::stod(tok));
            }
            if (!threshold_str.empty()) cfg.protocol.threshold = std::stod(threshold_str);
            const auto report = harness::run_drift_protocol(cfg);
            harness::write_drift_outputs(report, cfg, out_path);
            std::cout << "drift protocol done: " << report.cells.size() << " cells; outputs in "
                      << out_path << "\n";
            return 0;
        }
        if (roc->parsed()) return cmd_roc(scores_path, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
