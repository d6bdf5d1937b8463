// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "twinlink/aoi.hpp"
#include "twinlink/features.hpp"
#include "twinlink/forest.hpp"
#include "twinlink/svm.hpp"

namespace twinlink::harness {

using nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a_str(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

bool in_interval(double t, double lo, double hi) { return t >= lo && t < hi; }

}  // namespace

SplitSpec SplitSpec::for_stage(double t_k, double window) {
    SplitSpec s;
    s.train_lo = 0.0;
    s.train_hi = t_k - window;
    s.val_lo = t_k - window;
    s.val_hi = t_k;
    s.test_lo = t_k;
    s.test_hi = t_k + window;
    return s;
}

SplitResult split_by_time(const std::vector<scene::Sample>& data, const SplitSpec& spec) {
    SplitResult r;
    for (const auto& s : data) {
        if (in_interval(s.timestamp, spec.train_lo, spec.train_hi))
            r.train.push_back(s);
        else if (in_interval(s.timestamp, spec.val_lo, spec.val_hi))
            r.val.push_back(s);
        else if (in_interval(s.timestamp, spec.test_lo, spec.test_hi))
            r.test.push_back(s);
        else
            ++r.outside_intervals;
    }
    if (r.train.empty() || r.val.empty() || r.test.empty()) {
        std::ostringstream os;
        os << "split_by_time: empty split (train " << r.train.size() << ", val " << r.val.size()
           << ", test " << r.test.size() << ", outside " << r.outside_intervals << ")";
        throw std::runtime_error(os.str());
    }
    return r;
}

SplitResult split_by_ratio(const std::vector<scene::Sample>& data, std::uint64_t seed,
                           double train_frac, double val_frac) {
    if (train_frac <= 0.0 || val_frac <= 0.0 || train_frac + val_frac >= 1.0)
        throw std::invalid_argument("split_by_ratio: bad fractions");
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(mix_seed(seed, 0x53504c49));  // "SPLI"
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);

    const auto n = data.size();
    const auto n_train = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(n)));
    SplitResult r;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = data[order[i]];
        if (i < n_train)
            r.train.push_back(s);
        else if (i < n_train + n_val)
            r.val.push_back(s);
        else
            r.test.push_back(s);
    }
    if (r.train.empty() || r.val.empty() || r.test.empty()) {
        std::ostringstream os;
        os << "split_by_ratio: empty split (n " << n << " -> " << r.train.size() << "/"
           << r.val.size() << "/" << r.test.size() << ")";
        throw std::runtime_error(os.str());
    }
    return r;
}

std::vector<scene::Sample> composite_dataset(const std::vector<scene::Sample>& grid,
                                             const std::vector<scene::Sample>& vehicular,
                                             double t_k, double window) {
    std::vector<scene::Sample> out = grid;
    for (const auto& s : vehicular)
        if (s.timestamp <= t_k + window) out.push_back(s);
    return out;
}

InputPipeline::InputPipeline(const channel::ArrayConfig& array, const channel::OfdmConfig& ofdm,
                             int pool_rows, int pool_cols, std::uint64_t noise_seed)
    : array_(array),
      ofdm_(ofdm),
      dft_(transform::build_dft(array.n_v, array.n_h, ofdm.n_c)),
      pool_rows_(pool_rows),
      pool_cols_(pool_cols),
      noise_seed_(noise_seed) {
    const int rows = array.size();
    if (rows % pool_rows != 0 || ofdm.n_c % pool_cols != 0)
        throw std::invalid_argument("pipeline: pool factors must divide the ADCPM shape");
    input_rows_ = rows / pool_rows;
    input_cols_ = ofdm.n_c / pool_cols;
}

Eigen::VectorXf InputPipeline::input_for(const scene::Sample& s, double snr_db,
                                         std::uint64_t noise_tag) const {
    const bool clean = std::isinf(snr_db) && snr_db > 0.0;
    if (clean) {
        const auto it = clean_cache_.find(s.id);
        if (it != clean_cache_.end()) return it->second;
    }
    channel::Sfcrm h = channel::sfcrm(s.paths, array_, ofdm_);
    if (!clean) {
        channel::NoiseModel noise;
        noise.snr_db = snr_db;
        std::uint64_t tag = fnv1a_str(s.id);
        tag = mix_seed(tag, static_cast<std::uint64_t>(std::llround(snr_db * 64.0)) + 1);
        tag = mix_seed(tag, noise_tag);
        noise.rng_seed = mix_seed(noise_seed_, tag);
        h = channel::add_awgn(h, noise, ofdm_);
    }
    auto p = transform::adcpm({h}, dft_);
    if (pool_rows_ > 1 || pool_cols_ > 1) p = transform::maxpool(p, pool_rows_, pool_cols_);
    const Eigen::MatrixXf norm = transform::normalize_log_power(p);
    Eigen::VectorXf flat(norm.size());
    // Channel-major flattening: row r (angle), col c (delay) -> r * cols + c.
    for (int r = 0; r < norm.rows(); ++r)
        for (int c = 0; c < norm.cols(); ++c) flat(r * norm.cols() + c) = norm(r, c);
    if (clean) clean_cache_.emplace(s.id, flat);
    return flat;
}

models::TrainDataset InputPipeline::build(const std::vector<scene::Sample>& samples,
                                          double snr_db, std::optional<double> age_reference,
                                          std::uint64_t noise_tag) const {
    models::TrainDataset d;
    d.inputs.resize(input_dim(), static_cast<Eigen::Index>(samples.size()));
    d.labels.resize(samples.size());
    if (age_reference) d.ages.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        d.inputs.col(static_cast<Eigen::Index>(i)) = input_for(samples[i], snr_db, noise_tag);
        d.labels[i] = samples[i].label;
        if (age_reference) d.ages[i] = aoi::age(*age_reference, samples[i].timestamp);
    }
    return d;
}

namespace {

struct NeuralEval {
    double accuracy = 0.0;
    std::vector<double> logits;
    std::vector<double> probs;
};

NeuralEval eval_neural(const models::ModelState& model, const models::TrainDataset& data) {
    models::Predictor predictor(model);
    const auto preds = predictor.predict(data.inputs);
    NeuralEval e;
    std::vector<int> hard(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        e.logits.push_back(preds[i].logit);
        e.probs.push_back(preds[i].prob);
        hard[i] = preds[i].prob >= 0.5 ? 1 : 0;
    }
    e.accuracy = metrics::confusion(hard, data.labels).accuracy();
    return e;
}

// Feature-vector datasets for the SML models.
std::vector<models::LabeledFeature> to_labeled(
    const std::vector<scene::Sample>& samples, const features::Standardizer& std_,
    const features::ExtractOptions& opts, const features::PerturbConfig* perturb) {
    std::vector<models::LabeledFeature> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        const auto paths = perturb
                               ? features::perturb_paths(s.paths, *perturb, fnv1a_str(s.id))
                               : s.paths;
        models::LabeledFeature lf;
        lf.x = std_.apply(features::extract_features(paths, opts));
        lf.y = s.label;
        out.push_back(lf);
    }
    return out;
}

double forest_accuracy(const models::RandomForest& forest,
                       const std::vector<models::LabeledFeature>& data) {
    std::vector<int> pred, truth;
    for (const auto& d : data) {
        pred.push_back(forest.predict(d.x).label);
        truth.push_back(d.y);
    }
    return metrics::confusion(pred, truth).accuracy();
}

double svm_accuracy(const models::SvmModel& svm,
                    const std::vector<models::LabeledFeature>& data) {
    std::vector<int> pred, truth;
    for (const auto& d : data) {
        pred.push_back(svm.predict(d.x));
        truth.push_back(d.y);
    }
    return metrics::confusion(pred, truth).accuracy();
}

scene::SceneConfig grid_scene(const config::ExperimentConfig& cfg) {
    scene::SceneConfig s = cfg.scene;
    s.los_dropout_prob = cfg.protocol.los_dropout_grid;
    return s;
}

scene::SceneConfig vehicular_scene(const config::ExperimentConfig& cfg) {
    scene::SceneConfig s = cfg.scene;
    if (cfg.protocol.los_dropout_veh) s.los_dropout_prob = *cfg.protocol.los_dropout_veh;
    return s;
}

}  // namespace

StaticReport run_static_experiment(const config::ExperimentConfig& cfg) {
    StaticReport rep;
    const auto gen = scene::generate_grid_dataset(grid_scene(cfg));
    rep.generated = gen.samples.size();
    rep.dropped = gen.dropped_no_paths;

    const auto split = split_by_ratio(gen.samples, cfg.protocol.split_seed);
    rep.n_train = split.train.size();
    rep.n_val = split.val.size();
    rep.n_test = split.test.size();

    InputPipeline pipeline(cfg.array, cfg.ofdm, cfg.protocol.pool_rows, cfg.protocol.pool_cols,
                           cfg.protocol.noise_seed);
    const double inf = std::numeric_limits<double>::infinity();

    // Clean-trained neural model.
    const auto train_clean = pipeline.build(split.train, inf);
    const auto val_clean = pipeline.build(split.val, inf);
    rep.model = models::train(cfg.neural, train_clean, val_clean, std::nullopt, nullptr, "G");

    const auto test_clean = pipeline.build(split.test, inf);
    const auto eval_clean = eval_neural(rep.model, test_clean);
    rep.neural_noiseless = eval_clean.accuracy;
    rep.roc_neural = metrics::roc_auc(eval_clean.logits, test_clean.labels);
    rep.logits_neural = metrics::logit_histogram(eval_clean.logits, test_clean.labels);

    for (const double snr : cfg.protocol.snr_sweep_db) {
        const auto test_noisy = pipeline.build(split.test, snr, std::nullopt, 0xE);
        rep.neural_by_snr.push_back({snr, eval_neural(rep.model, test_noisy).accuracy});
    }

    // Augmented variant: clean training samples plus noisy copies.
    if (cfg.protocol.augment) {
        const auto noisy = pipeline.build(split.train, cfg.protocol.augment_snr_db,
                                          std::nullopt, 0xA);
        models::TrainDataset aug;
        aug.inputs.resize(train_clean.inputs.rows(), train_clean.inputs.cols() * 2);
        aug.inputs << train_clean.inputs, noisy.inputs;
        aug.labels = train_clean.labels;
        aug.labels.insert(aug.labels.end(), noisy.labels.begin(), noisy.labels.end());
        const auto aug_model =
            models::train(cfg.neural, aug, val_clean, std::nullopt, nullptr, "G+aug");
        for (const double snr : cfg.protocol.snr_sweep_db) {
            const auto test_noisy = pipeline.build(split.test, snr, std::nullopt, 0xE);
            rep.neural_aug_by_snr.push_back({snr, eval_neural(aug_model, test_noisy).accuracy});
            if (snr == cfg.protocol.augment_snr_db)
                rep.neural_aug_at_aug_snr = rep.neural_aug_by_snr.back().accuracy;
        }
    }

    // SML models: exact features for training, exact and perturbed at test.
    std::vector<features::FeatureVector> train_feats;
    for (const auto& s : split.train)
        train_feats.push_back(features::extract_features(s.paths, cfg.extract));
    const auto standardizer = features::Standardizer::fit(train_feats);

    const auto train_lf = to_labeled(split.train, standardizer, cfg.extract, nullptr);
    const auto test_exact = to_labeled(split.test, standardizer, cfg.extract, nullptr);
    features::PerturbConfig perturb = cfg.perturb;
    perturb.enabled = true;
    const auto test_pert = to_labeled(split.test, standardizer, cfg.extract, &perturb);

    models::ForestConfig fc;
    fc.rng_seed = mix_seed(cfg.protocol.split_seed, 0xF0);
    const auto forest = models::RandomForest::fit(train_lf, fc);
    rep.forest_exact = forest_accuracy(forest, test_exact);
    rep.forest_perturbed = forest_accuracy(forest, test_pert);

    models::SvmConfig svc;
    svc.rng_seed = mix_seed(cfg.protocol.split_seed, 0xF1);
    const auto svm = models::SvmModel::fit(train_lf, svc);
    rep.svm_exact = svm_accuracy(svm, test_exact);
    rep.svm_perturbed = svm_accuracy(svm, test_pert);

    return rep;
}

DriftReport run_drift_protocol(const config::ExperimentConfig& cfg) {
    DriftReport rep;
    const auto grid = scene::generate_grid_dataset(grid_scene(cfg));
    const auto veh = scene::generate_vehicular_dataset(vehicular_scene(cfg));
    rep.grid_samples = grid.samples.size();
    rep.vehicular_samples = veh.samples.size();

    InputPipeline pipeline(cfg.array, cfg.ofdm, cfg.protocol.pool_rows, cfg.protocol.pool_cols,
                           cfg.protocol.noise_seed);
    const double train_snr = cfg.protocol.train_snr_db;
    const double eval_snr = cfg.protocol.eval_snr_db;

    // Initial deployment: grid-trained model.
    const auto grid_split = split_by_ratio(grid.samples, cfg.protocol.split_seed);
    const auto g_train = pipeline.build(grid_split.train, train_snr, std::nullopt, 0x1);
    const auto g_val = pipeline.build(grid_split.val, train_snr, std::nullopt, 0x1);
    const auto static_model =
        models::train(cfg.neural, g_train, g_val, std::nullopt, nullptr, "G");

    const auto g_test = pipeline.build(grid_split.test, eval_snr, std::nullopt, 0x2);
    const auto g_eval = eval_neural(static_model, g_test);
    rep.static_test_accuracy = g_eval.accuracy;
    rep.baseline_static_logits = metrics::logit_histogram(g_eval.logits, g_test.labels);

    // Frozen-model accuracy on every drifted test window.
    const double window = cfg.protocol.eval_window;
    for (std::size_t k = 0; k < cfg.protocol.stage_times.size(); ++k) {
        const double t_k = cfg.protocol.stage_times[k];
        const auto stage_data = composite_dataset(grid.samples, veh.samples, t_k, window);
        const auto split = split_by_time(stage_data, SplitSpec::for_stage(t_k, window));
        const auto test = pipeline.build(split.test, eval_snr, std::nullopt, 0x2);
        const auto eval = eval_neural(static_model, test);
        rep.baseline_accuracy.push_back(eval.accuracy);
        if (k == 0) {
            rep.baseline_drift_logits = metrics::logit_histogram(eval.logits, test.labels);
            try {
                rep.baseline_drift_roc = metrics::roc_auc(eval.logits, test.labels);
            } catch (const std::invalid_argument&) {
                // single-class window: ROC undefined, curve left empty
            }
        }
    }

    // AoI-aware fine-tuning chains, one per decay rate.
    models::NeuralConfig ft_cfg = cfg.neural;
    if (cfg.protocol.finetune_max_epochs > 0)
        ft_cfg.max_epochs = cfg.protocol.finetune_max_epochs;

    for (const double gamma : cfg.protocol.gammas) {
        models::ModelState state = static_model;
        std::ostringstream glabel;
        glabel << "gamma=" << gamma;
        for (std::size_t k = 0; k < cfg.protocol.stage_times.size(); ++k) {
            const double t_k = cfg.protocol.stage_times[k];
            const auto stage_data = composite_dataset(grid.samples, veh.samples, t_k, window);
            const auto split = split_by_time(stage_data, SplitSpec::for_stage(t_k, window));

            DriftCell cell;
            cell.gamma = gamma;
            cell.stage = static_cast<int>(k) + 1;
            cell.n_available = split.train.size();
            cell.n_val = split.val.size();
            cell.n_test = split.test.size();

            aoi::AoiConfig acfg;
            acfg.gamma = gamma;
            acfg.threshold = cfg.protocol.threshold;
            // Pruning is evaluated at the drift-detection time t_k; loss ages
            // are taken relative to the end of the evaluation window.
            const auto pruned = aoi::prune(split.train, t_k, acfg);
            cell.n_train = pruned.n_retained;
            cell.n_dropped = pruned.n_dropped;

            if (pruned.retained.empty()) {
                cell.failed = true;
                rep.cells.push_back(cell);
                continue;
            }

            const double age_ref = t_k + window;
            const auto train_set =
                pipeline.build(pruned.retained, train_snr, age_ref, 0x1);
            const auto val_set = pipeline.build(split.val, train_snr, std::nullopt, 0x1);
            std::ostringstream sid;
            sid << "S" << (k + 1);
            state = models::train(ft_cfg, train_set, val_set, acfg, &state, sid.str());

            const auto test_set = pipeline.build(split.test, eval_snr, std::nullopt, 0x2);
            const auto eval = eval_neural(state, test_set);
            cell.accuracy = eval.accuracy;
            cell.logits = metrics::logit_histogram(eval.logits, test_set.labels);
            rep.cells.push_back(cell);
        }
        rep.lineage[glabel.str()] = state.lineage;
    }
    return rep;
}

namespace {

ordered_json hist_to_json(const metrics::LogitHistogram& h) {
    ordered_json j;
    j["lo"] = h.lo;
    j["hi"] = h.hi;
    j["bins"] = h.bins;
    j["class0"] = h.class0;
    j["class1"] = h.class1;
    j["mean0"] = h.mean0;
    j["mean1"] = h.mean1;
    j["n0"] = h.n0;
    j["n1"] = h.n1;
    return j;
}

ordered_json snr_points_to_json(const std::vector<SnrPoint>& pts) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : pts) {
        ordered_json j;
        if (std::isinf(p.snr_db))
            j["snr_db"] = "inf";
        else
            j["snr_db"] = p.snr_db;
        j["accuracy"] = p.accuracy;
        arr.push_back(std::move(j));
    }
    return arr;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << content;
}

void write_roc_csv(const std::string& path, const metrics::RocResult& roc) {
    std::ostringstream os;
    os.precision(17);
    os << "fpr,tpr,threshold\n";
    for (const auto& p : roc.points)
        os << p.fpr << ',' << p.tpr << ',' << p.threshold << '\n';
    write_text_file(path, os.str());
}

void append_hist_csv(std::ostringstream& os, const std::string& context,
                     const metrics::LogitHistogram& h) {
    const double width = (h.hi - h.lo) / h.bins;
    for (int cls = 0; cls <= 1; ++cls) {
        const auto& counts = cls == 0 ? h.class0 : h.class1;
        for (int b = 0; b < h.bins; ++b)
            os << context << ',' << cls << ',' << h.lo + b * width << ','
               << h.lo + (b + 1) * width << ',' << counts[static_cast<std::size_t>(b)] << '\n';
    }
}

}  // namespace

void write_static_outputs(const StaticReport& report, const config::ExperimentConfig& cfg,
                          const std::string& dir) {
    std::filesystem::create_directories(dir);
    ordered_json j;
    j["experiment"] = "static";
    j["seed"] = cfg.base_seed;
    j["splits"] = {{"train", report.n_train}, {"val", report.n_val}, {"test", report.n_test}};
    j["generated"] = report.generated;
    j["dropped"] = report.dropped;
    j["neural"] = {{"noiseless_accuracy", report.neural_noiseless},
                   {"auc", report.roc_neural.auc},
                   {"by_snr", snr_points_to_json(report.neural_by_snr)}};
    if (!report.neural_aug_by_snr.empty())
        j["neural_augmented"] = {{"at_augment_snr", report.neural_aug_at_aug_snr},
                                 {"by_snr", snr_points_to_json(report.neural_aug_by_snr)}};
    j["forest"] = {{"exact", report.forest_exact}, {"perturbed", report.forest_perturbed}};
    j["svm"] = {{"exact", report.svm_exact}, {"perturbed", report.svm_perturbed}};
    j["logits"] = hist_to_json(report.logits_neural);
    write_text_file(dir + "/metrics.json", j.dump(2) + "\n");

    write_roc_csv(dir + "/roc.csv", report.roc_neural);

    std::ostringstream hist;
    hist << "context,class,bin_lo,bin_hi,count\n";
    append_hist_csv(hist, "static", report.logits_neural);
    write_text_file(dir + "/logits_hist.csv", hist.str());
}

void write_drift_outputs(const DriftReport& report, const config::ExperimentConfig& cfg,
                         const std::string& dir) {
    std::filesystem::create_directories(dir);
    ordered_json j;
    j["experiment"] = "drift";
    j["seed"] = cfg.base_seed;
    j["grid_samples"] = report.grid_samples;
    j["vehicular_samples"] = report.vehicular_samples;
    j["static_test_accuracy"] = report.static_test_accuracy;
    j["baseline_accuracy"] = report.baseline_accuracy;
    j["baseline_static_logits"] = hist_to_json(report.baseline_static_logits);
    j["baseline_drift_logits"] = hist_to_json(report.baseline_drift_logits);
    j["baseline_drift_auc"] = report.baseline_drift_roc.auc;
    ordered_json cells = ordered_json::array();
    for (const auto& c : report.cells) {
        ordered_json cj;
        cj["gamma"] = c.gamma;
        cj["stage"] = c.stage;
        cj["failed"] = c.failed;
        cj["accuracy"] = c.accuracy;
        cj["n_train"] = c.n_train;
        cj["n_available"] = c.n_available;
        cj["n_dropped"] = c.n_dropped;
        cj["n_val"] = c.n_val;
        cj["n_test"] = c.n_test;
        cells.push_back(std::move(cj));
    }
    j["cells"] = std::move(cells);
    ordered_json lin;
    for (const auto& [label, chain] : report.lineage) lin[label] = chain;
    j["lineage"] = std::move(lin);
    write_text_file(dir + "/metrics.json", j.dump(2) + "\n");

    std::ostringstream table;
    table << "gamma,stage,accuracy,n_trn,n_val,n_tst,failed\n";
    for (const auto& c : report.cells) {
        char line[160];
        std::snprintf(line, sizeof line, "%.6g,%d,%.6g,%zu,%zu,%zu,%d\n", c.gamma, c.stage,
                      c.accuracy, c.n_train, c.n_val, c.n_test, c.failed ? 1 : 0);
        table << line;
    }
    write_text_file(dir + "/table3.csv", table.str());

    write_roc_csv(dir + "/roc.csv", report.baseline_drift_roc);

    std::ostringstream hist;
    hist << "context,class,bin_lo,bin_hi,count\n";
    append_hist_csv(hist, "baseline_static", report.baseline_static_logits);
    append_hist_csv(hist, "baseline_drift", report.baseline_drift_logits);
    for (const auto& c : report.cells) {
        if (c.failed) continue;
        std::ostringstream ctx;
        ctx << "gamma" << c.gamma << "_s" << c.stage;
        append_hist_csv(hist, ctx.str(), c.logits);
    }
    write_text_file(dir + "/logits_hist.csv", hist.str());
}

}  // namespace twinlink::harness
