// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_HARNESS_HPP
#define TWINLINK_HARNESS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "twinlink/config.hpp"
#include "twinlink/metrics.hpp"
#include "twinlink/nn.hpp"
#include "twinlink/scene.hpp"
#include "twinlink/transform.hpp"

namespace twinlink::harness {

// Half-open timestamp intervals for train/validation/test.
struct SplitSpec {
    double train_lo = 0.0, train_hi = 0.0;
    double val_lo = 0.0, val_hi = 0.0;
    double test_lo = 0.0, test_hi = 0.0;

    // Stage splits: train [0, t_k - w), val [t_k - w, t_k), test [t_k, t_k + w).
    static SplitSpec for_stage(double t_k, double window);
};

struct SplitResult {
    std::vector<scene::Sample> train;
    std::vector<scene::Sample> val;
    std::vector<scene::Sample> test;
    std::size_t outside_intervals = 0;  // timestamp mode only
};

// Interval membership; throws when any split comes out empty.
SplitResult split_by_time(const std::vector<scene::Sample>& data, const SplitSpec& spec);

// Seeded shuffle then 70/20/10 partition (exact multiset partition).
SplitResult split_by_ratio(const std::vector<scene::Sample>& data, std::uint64_t seed,
                           double train_frac = 0.7, double val_frac = 0.2);

// Composite stage dataset S_k: grid samples plus vehicular samples with
// t <= t_k + window.
std::vector<scene::Sample> composite_dataset(const std::vector<scene::Sample>& grid,
                                             const std::vector<scene::Sample>& vehicular,
                                             double t_k, double window);

// Builds pooled, log-normalized ADCPM classifier inputs from samples.
// Clean inputs are cached by sample id; noisy variants are synthesized on
// demand with per-sample seeds derived from (noise_seed, id, snr, tag).
class InputPipeline {
  public:
    InputPipeline(const channel::ArrayConfig& array, const channel::OfdmConfig& ofdm,
                  int pool_rows, int pool_cols, std::uint64_t noise_seed);

    int input_dim() const { return input_rows_ * input_cols_; }
    int input_rows() const { return input_rows_; }
    int input_cols() const { return input_cols_; }

    Eigen::VectorXf input_for(const scene::Sample& s, double snr_db,
                              std::uint64_t noise_tag = 0) const;

    // Dataset for training/eval; ages empty unless `age_reference` is set, in
    // which case ages[i] = age_reference - timestamp_i.
    models::TrainDataset build(const std::vector<scene::Sample>& samples, double snr_db,
                               std::optional<double> age_reference = std::nullopt,
                               std::uint64_t noise_tag = 0) const;

  private:
    channel::ArrayConfig array_;
    channel::OfdmConfig ofdm_;
    transform::DftSet dft_;
    int pool_rows_, pool_cols_;
    int input_rows_, input_cols_;
    std::uint64_t noise_seed_;
    mutable std::unordered_map<std::string, Eigen::VectorXf> clean_cache_;
};

struct SnrPoint {
    double snr_db = 0.0;  // +inf = noiseless
    double accuracy = 0.0;
};

struct StaticReport {
    std::size_t n_train = 0, n_val = 0, n_test = 0;
    std::size_t generated = 0, dropped = 0;

    double neural_noiseless = 0.0;
    double neural_aug_at_aug_snr = 0.0;  // augmented model at the augmentation SNR
    double forest_exact = 0.0;           // ground-truth features
    double forest_perturbed = 0.0;
    double svm_exact = 0.0;
    double svm_perturbed = 0.0;

    std::vector<SnrPoint> neural_by_snr;
    std::vector<SnrPoint> neural_aug_by_snr;

    metrics::RocResult roc_neural;  // noiseless test scores
    metrics::LogitHistogram logits_neural;
    models::ModelState model;  // trained clean model
};

StaticReport run_static_experiment(const config::ExperimentConfig& cfg);

struct DriftCell {
    double gamma = 0.0;
    int stage = 0;  // 1-based
    bool failed = false;  // pruning emptied the train split
    double accuracy = 0.0;
    std::size_t n_train = 0;  // retained after pruning
    std::size_t n_available = 0;  // before pruning
    std::size_t n_dropped = 0;
    std::size_t n_val = 0;
    std::size_t n_test = 0;
    metrics::LogitHistogram logits;
};

struct DriftReport {
    double static_test_accuracy = 0.0;  // grid model on grid test split
    std::vector<double> baseline_accuracy;  // frozen grid model per stage test window
    metrics::LogitHistogram baseline_static_logits;  // frozen model, grid test
    metrics::LogitHistogram baseline_drift_logits;   // frozen model, stage-1 window
    metrics::RocResult baseline_drift_roc;           // frozen model, stage-1 window
    std::vector<DriftCell> cells;                    // gamma-major, stage order
    std::map<std::string, std::vector<std::string>> lineage;  // gamma label -> chain
    std::size_t grid_samples = 0, vehicular_samples = 0;
};

DriftReport run_drift_protocol(const config::ExperimentConfig& cfg);

// metrics.json, table3.csv, roc.csv, logits_hist.csv under `dir`.
void write_static_outputs(const StaticReport& report, const config::ExperimentConfig& cfg,
                          const std::string& dir);
void write_drift_outputs(const DriftReport& report, const config::ExperimentConfig& cfg,
                         const std::string& dir);

}  // namespace twinlink::harness

#endif  // TWINLINK_HARNESS_HPP
