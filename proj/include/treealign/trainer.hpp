#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "treealign/attention.hpp"
#include "treealign/dataset_io.hpp"
#include "treealign/entailment.hpp"
#include "treealign/manifold_distance.hpp"
#include "treealign/metrics.hpp"
#include "treealign/synthetic.hpp"
#include "treealign/taxonomy.hpp"

namespace treealign {

struct TrainConfig {
    double alpha = 0.5;
    double lr = 0.05;
    int epochs = 200; // full-batch gradient steps
    double c1_init = 0.25;
    double c2_init = 0.25;
    double c_min = Curvature::kDefaultFloor;
    std::string r_policy = "batch"; // "batch" or "fixed"
    double r_fixed = 0.0;
    double temperature = 0.1;
    std::uint64_t seed = 0;
    int treecut_count = 25;
    bool cosine_lr = false;
    SyntheticSpec synthetic;    // used when data_path is empty; its seed is
                                // overridden by the config seed
    std::string data_path;      // train ingestion (JSON Lines)
    std::string eval_data_path; // held-out ingestion (JSON Lines)

    void validate() const;
    static TrainConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct StepTrace {
    int step = 0;
    double c1 = 0.0, c2 = 0.0, c3_star = 0.0;
    double dc3_dc1 = 0.0, dc3_dc2 = 0.0;
    double surrogate = 0.0;
    double text_entailment = 0.0;
    double visual_entailment = 0.0;
    double cross_modal = 0.0;
    double total = 0.0;
    double r = 0.0;
    bool r_clamped = false;
    bool certificate_satisfied = false;

    nlohmann::json to_json() const;
};

/// Candidate text features for one hierarchy level: node identifiers in
/// sorted order with one prototype row each.
struct LevelCandidates {
    std::vector<std::string> ids;
    Eigen::MatrixXd prototypes; // |ids| x d
    std::map<std::string, int> index;
};

struct TrainState {
    AttentionParams params;
    double c1 = 0.25;
    double c2 = 0.25;
};

/// Frozen per-run training data: the label tree, per-level candidate
/// prototypes, and per-sample truth node identifiers.
struct TrainData {
    Dataset dataset;
    Taxonomy taxonomy;
    std::vector<LevelCandidates> candidates;           // per level, coarse to fine
    std::vector<std::vector<std::string>> truth_ids;   // per sample, per level

    explicit TrainData(Dataset data);
};

/// Per-level cross-entropy over cosine similarities between the visual
/// feature and the candidate text features at the given temperature.
double surrogate_task_loss(const FeatureTree& visual,
                           const std::vector<LevelCandidates>& candidates,
                           const std::vector<std::string>& truth_ids,
                           double temperature);

struct SurrogateGrad {
    double loss;
    Eigen::MatrixXd d_visual;
};

SurrogateGrad surrogate_task_loss_grad(const FeatureTree& visual,
                                       const std::vector<LevelCandidates>& candidates,
                                       const std::vector<std::string>& truth_ids,
                                       double temperature);

/// Mean losses over the batch together with all parameter gradients.
/// d_c1/d_c2 are total derivatives: the explicit in-modal terms plus the
/// cross-modal curvature gradient chained through the implicit partials
/// of the intermediate curvature.
struct BatchLoss {
    double surrogate = 0.0;
    double text_entailment = 0.0;
    double visual_entailment = 0.0;
    double cross_modal = 0.0;
    double total = 0.0;
    Eigen::MatrixXd d_wq, d_wk, d_wv;
    double d_c1 = 0.0;
    double d_c2 = 0.0;
    double r = 0.0;
    bool r_clamped = false;
    IntermediateSolution solution;

    explicit BatchLoss(IntermediateSolution sol) : solution(std::move(sol)) {}
};

BatchLoss batch_loss_and_grads(const TrainState& state, const TrainData& data,
                               const TrainConfig& config);

std::pair<TrainState, StepTrace> train_step(const TrainState& state,
                                            const TrainData& data,
                                            const TrainConfig& config, int step_index);

struct ExperimentResult {
    MetricReport metrics;
    std::vector<StepTrace> traces;
    TrainState final_state;
    nlohmann::json report;
};

/// Builds a prediction table for the dataset under the given parameters:
/// per node, the cosine between the visual feature at the node's level
/// and the node's prototype.
PredictionTable build_predictions(const Dataset& data, const TrainData& train,
                                  const AttentionParams& params);

/// Synthesizes or ingests data, trains, evaluates LA/HCA/MTA on the
/// held-out split, and assembles a deterministic report.
ExperimentResult run_experiment(const TrainConfig& config);

/// Writes report.json and traces.jsonl into out_dir (created if absent).
void write_experiment(const ExperimentResult& result, const std::string& out_dir);

} // namespace treealign
