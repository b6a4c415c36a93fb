#include "treealign/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

namespace treealign {

namespace {

// Offset deriving the held-out synthesis stream from the config seed.
constexpr std::uint64_t kEvalSeedOffset = 1000003;

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        throw NumericError("cosine similarity undefined for zero vector");
    }
    return a.dot(b) / (na * nb);
}

/// d cos(v, t) / dv = t/(|v||t|) - cos * v/|v|^2.
Eigen::VectorXd cosine_grad_v(const Eigen::VectorXd& v, const Eigen::VectorXd& t,
                              double cos_value) {
    const double nv = v.norm();
    return t / (nv * t.norm()) - cos_value / (nv * nv) * v;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
    const double m = scores.maxCoeff();
    Eigen::ArrayXd e = (scores.array() - m).exp();
    return (e / e.sum()).matrix();
}

std::string concat_labels(const std::vector<std::string>& labels, std::size_t count) {
    std::string id;
    for (std::size_t i = 0; i < count; ++i) id += labels[i];
    return id;
}

} // namespace

void TrainConfig::validate() const {
    if (alpha < 0.0 || !std::isfinite(alpha)) {
        throw ContractViolation("config: alpha must be non-negative");
    }
    if (!(lr > 0.0) || !std::isfinite(lr)) {
        throw ContractViolation("config: lr must be positive");
    }
    if (epochs < 1) throw ContractViolation("config: epochs must be at least 1");
    if (!(temperature > 0.0)) throw ContractViolation("config: temperature must be positive");
    if (treecut_count < 1) throw ContractViolation("config: treecut_count must be positive");
    if (!(c_min > 0.0)) throw ContractViolation("config: c_min must be positive");
    if (c1_init < c_min || c2_init < c_min) {
        throw ContractViolation("config: curvature inits must be at least c_min");
    }
    if (r_policy != "batch" && r_policy != "fixed") {
        throw ContractViolation("config: r_policy must be 'batch' or 'fixed'");
    }
    if (r_policy == "fixed" && !(r_fixed > 0.0)) {
        throw ContractViolation("config: fixed r policy requires r_fixed > 0");
    }
    if (!data_path.empty() && eval_data_path.empty()) {
        throw ContractViolation("config: data_path requires eval_data_path");
    }
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.alpha = j.value("alpha", c.alpha);
    c.lr = j.value("lr", c.lr);
    c.epochs = j.value("epochs", c.epochs);
    c.c1_init = j.value("c1_init", c.c1_init);
    c.c2_init = j.value("c2_init", c.c2_init);
    c.c_min = j.value("c_min", c.c_min);
    c.r_policy = j.value("r_policy", c.r_policy);
    c.r_fixed = j.value("r_fixed", c.r_fixed);
    c.temperature = j.value("temperature", c.temperature);
    c.seed = j.value("seed", c.seed);
    c.treecut_count = j.value("treecut_count", c.treecut_count);
    c.cosine_lr = j.value("cosine_lr", c.cosine_lr);
    c.data_path = j.value("data_path", c.data_path);
    c.eval_data_path = j.value("eval_data_path", c.eval_data_path);
    if (j.contains("synthetic")) {
        const auto& s = j.at("synthetic");
        c.synthetic.branching = s.value("branching", c.synthetic.branching);
        c.synthetic.dim = s.value("dim", c.synthetic.dim);
        c.synthetic.separation = s.value("separation", c.synthetic.separation);
        c.synthetic.noise = s.value("noise", c.synthetic.noise);
        c.synthetic.samples_per_leaf = s.value("samples_per_leaf", c.synthetic.samples_per_leaf);
    }
    c.validate();
    return c;
}

nlohmann::json TrainConfig::to_json() const {
    return {{"alpha", alpha},
            {"lr", lr},
            {"epochs", epochs},
            {"c1_init", c1_init},
            {"c2_init", c2_init},
            {"c_min", c_min},
            {"r_policy", r_policy},
            {"r_fixed", r_fixed},
            {"temperature", temperature},
            {"seed", seed},
            {"treecut_count", treecut_count},
            {"cosine_lr", cosine_lr},
            {"data_path", data_path},
            {"eval_data_path", eval_data_path},
            {"synthetic",
             {{"branching", synthetic.branching},
              {"dim", synthetic.dim},
              {"separation", synthetic.separation},
              {"noise", synthetic.noise},
              {"samples_per_leaf", synthetic.samples_per_leaf}}}};
}

nlohmann::json StepTrace::to_json() const {
    return {{"step", step},
            {"c1", c1},
            {"c2", c2},
            {"c3_star", c3_star},
            {"dc3_dc1", dc3_dc1},
            {"dc3_dc2", dc3_dc2},
            {"surrogate", surrogate},
            {"text_entailment", text_entailment},
            {"visual_entailment", visual_entailment},
            {"cross_modal", cross_modal},
            {"total", total},
            {"r", r},
            {"r_clamped", r_clamped},
            {"certificate_satisfied", certificate_satisfied}};
}

TrainData::TrainData(Dataset data)
    : dataset(std::move(data)),
      taxonomy([&] {
          std::vector<std::vector<std::string>> tuples;
          tuples.reserve(dataset.samples.size());
          for (const auto& s : dataset.samples) tuples.push_back(s.labels);
          return Taxonomy::from_annotations(tuples);
      }()) {
    const int h = dataset.depth;
    const int d = dataset.dim;

    truth_ids.reserve(dataset.samples.size());
    for (const auto& s : dataset.samples) {
        std::vector<std::string> ids(static_cast<std::size_t>(h));
        for (int lev = 0; lev < h; ++lev) {
            ids[static_cast<std::size_t>(lev)] =
                concat_labels(s.labels, static_cast<std::size_t>(lev) + 1);
        }
        truth_ids.push_back(std::move(ids));
    }

    // Per-level prototypes: mean text feature over the samples under each node.
    candidates.resize(static_cast<std::size_t>(h));
    for (int lev = 0; lev < h; ++lev) {
        auto& cand = candidates[static_cast<std::size_t>(lev)];
        std::map<std::string, std::pair<Eigen::VectorXd, int>> acc;
        for (std::size_t s = 0; s < dataset.samples.size(); ++s) {
            const std::string& id = truth_ids[s][static_cast<std::size_t>(lev)];
            auto [it, inserted] = acc.try_emplace(id, Eigen::VectorXd::Zero(d), 0);
            it->second.first += dataset.samples[s].text.features.row(lev).transpose();
            it->second.second += 1;
        }
        cand.prototypes.resize(static_cast<Eigen::Index>(acc.size()), d);
        int row = 0;
        for (const auto& [id, sum_count] : acc) {
            cand.ids.push_back(id);
            cand.index[id] = row;
            cand.prototypes.row(row) =
                (sum_count.first / static_cast<double>(sum_count.second)).transpose();
            ++row;
        }
    }
}

double surrogate_task_loss(const FeatureTree& visual,
                           const std::vector<LevelCandidates>& candidates,
                           const std::vector<std::string>& truth_ids,
                           double temperature) {
    return surrogate_task_loss_grad(visual, candidates, truth_ids, temperature).loss;
}

SurrogateGrad surrogate_task_loss_grad(const FeatureTree& visual,
                                       const std::vector<LevelCandidates>& candidates,
                                       const std::vector<std::string>& truth_ids,
                                       double temperature) {
    const Eigen::Index h = visual.features.rows();
    if (candidates.size() != static_cast<std::size_t>(h) ||
        truth_ids.size() != static_cast<std::size_t>(h)) {
        throw ContractViolation("surrogate_task_loss: level count mismatch");
    }
    if (!(temperature > 0.0)) {
        throw ContractViolation("surrogate_task_loss: temperature must be positive");
    }

    SurrogateGrad out;
    out.loss = 0.0;
    out.d_visual = Eigen::MatrixXd::Zero(h, visual.features.cols());

    for (Eigen::Index lev = 0; lev < h; ++lev) {
        const auto& cand = candidates[static_cast<std::size_t>(lev)];
        auto truth_it = cand.index.find(truth_ids[static_cast<std::size_t>(lev)]);
        if (truth_it == cand.index.end()) {
            throw ContractViolation("surrogate_task_loss: truth label '" +
                                    truth_ids[static_cast<std::size_t>(lev)] +
                                    "' missing from candidates");
        }
        const int truth = truth_it->second;
        const Eigen::VectorXd v = visual.features.row(lev).transpose();

        const Eigen::Index k = cand.prototypes.rows();
        Eigen::VectorXd cos_values(k);
        Eigen::VectorXd scores(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            cos_values[j] = cosine(v, cand.prototypes.row(j).transpose());
            scores[j] = cos_values[j] / temperature;
        }
        const Eigen::VectorXd p = softmax(scores);
        out.loss += -std::log(std::max(p[truth], 1e-300));

        Eigen::VectorXd dv = Eigen::VectorXd::Zero(v.size());
        for (Eigen::Index j = 0; j < k; ++j) {
            const double dscore = p[j] - (j == truth ? 1.0 : 0.0);
            dv += dscore / temperature *
                  cosine_grad_v(v, cand.prototypes.row(j).transpose(), cos_values[j]);
        }
        out.d_visual.row(lev) = dv.transpose();
    }
    return out;
}

BatchLoss batch_loss_and_grads(const TrainState& state, const TrainData& data,
                               const TrainConfig& config) {
    const int d = data.dataset.dim;
    const std::size_t n = data.dataset.samples.size();
    const Curvature c1(state.c1, config.c_min);
    const Curvature c2(state.c2, config.c_min);

    // Features first: the batch radius needs them.
    std::vector<FeatureTree> visuals;
    visuals.reserve(n);
    for (const auto& s : data.dataset.samples) {
        visuals.push_back(cross_attention_extract(s.text, s.stack, state.params));
    }

    const ConvexityCertificate cert = r_min_threshold(c1, c2, config.c_min);
    double r_value = config.r_fixed;
    bool r_clamped = false;
    if (config.r_policy != "fixed") {
        std::vector<Eigen::VectorXd> features;
        features.reserve(n * static_cast<std::size_t>(data.dataset.depth) * 2);
        for (std::size_t s = 0; s < n; ++s) {
            for (int lev = 0; lev < data.dataset.depth; ++lev) {
                features.push_back(
                    data.dataset.samples[s].text.features.row(lev).transpose());
                features.push_back(visuals[s].features.row(lev).transpose());
            }
        }
        r_value = compute_r(features).r;
        if (r_value < cert.r_min_star) {
            r_value = cert.r_min_star;
            r_clamped = true;
        }
    }

    const RadiusParameter radius(r_value, config.r_policy == "fixed"
                                              ? RadiusParameter::Source::fixed
                                              : RadiusParameter::Source::batch_computed);
    BatchLoss out(solve_intermediate(c1, c2, radius, 1e-8, config.c_min));
    out.r = r_value;
    out.r_clamped = r_clamped;
    const Curvature c3 = out.solution.c3_star;

    out.d_wq = Eigen::MatrixXd::Zero(d, d);
    out.d_wk = Eigen::MatrixXd::Zero(d, d);
    out.d_wv = Eigen::MatrixXd::Zero(d, d);
    double d_c1_direct = 0.0;
    double d_c2_direct = 0.0;
    double d_c3 = 0.0;

    for (std::size_t s = 0; s < n; ++s) {
        const Sample& sample = data.dataset.samples[s];
        const auto sur = surrogate_task_loss_grad(visuals[s], data.candidates,
                                                  data.truth_ids[s], config.temperature);
        const auto tent = in_modal_loss_grad(sample.text.features, c1);
        const auto vent = in_modal_loss_grad(visuals[s].features, c2);
        const auto cross =
            cross_modal_loss_grad(visuals[s].features, sample.text.features, c3);

        out.surrogate += sur.loss;
        out.text_entailment += tent.report.total;
        out.visual_entailment += vent.report.total;
        out.cross_modal += cross.report.total;
        d_c1_direct += tent.d_curvature;
        d_c2_direct += vent.d_curvature;
        d_c3 += cross.d_curvature;

        const Eigen::MatrixXd d_visual =
            sur.d_visual + config.alpha * (vent.d_features + cross.d_visual);
        const auto attn =
            cross_attention_backward(sample.text, sample.stack, state.params, d_visual);
        out.d_wq += attn.d_wq;
        out.d_wk += attn.d_wk;
        out.d_wv += attn.d_wv;
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    out.surrogate *= inv_n;
    out.text_entailment *= inv_n;
    out.visual_entailment *= inv_n;
    out.cross_modal *= inv_n;
    out.total = out.surrogate + config.alpha * (out.text_entailment +
                                                out.visual_entailment + out.cross_modal);
    out.d_wq *= inv_n;
    out.d_wk *= inv_n;
    out.d_wv *= inv_n;

    // Total derivatives (Eq. of the training algorithm): explicit parts
    // plus the cross-modal curvature gradient through the implicit
    // partials of the intermediate minimizer.
    const double d_c3_mean = config.alpha * d_c3 * inv_n;
    out.d_c1 = config.alpha * d_c1_direct * inv_n + d_c3_mean * out.solution.dc3_dc1;
    out.d_c2 = config.alpha * d_c2_direct * inv_n + d_c3_mean * out.solution.dc3_dc2;
    return out;
}

std::pair<TrainState, StepTrace> train_step(const TrainState& state,
                                            const TrainData& data,
                                            const TrainConfig& config, int step_index) {
    const BatchLoss loss = batch_loss_and_grads(state, data, config);

    StepTrace trace;
    trace.step = step_index;
    trace.c1 = state.c1;
    trace.c2 = state.c2;
    trace.c3_star = loss.solution.c3_star.value();
    trace.dc3_dc1 = loss.solution.dc3_dc1;
    trace.dc3_dc2 = loss.solution.dc3_dc2;
    trace.surrogate = loss.surrogate;
    trace.text_entailment = loss.text_entailment;
    trace.visual_entailment = loss.visual_entailment;
    trace.cross_modal = loss.cross_modal;
    trace.total = loss.total;
    trace.r = loss.r;
    trace.r_clamped = loss.r_clamped;
    trace.certificate_satisfied =
        loss.solution.certificate_satisfied || loss.r_clamped;

    if (!std::isfinite(loss.total)) {
        throw NumericError("train_step: non-finite loss, trace = " +
                           trace.to_json().dump());
    }

    double lr = config.lr;
    if (config.cosine_lr) {
        lr *= 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step_index) /
                                    static_cast<double>(config.epochs)));
    }

    TrainState next = state;
    next.params.wq -= lr * loss.d_wq;
    next.params.wk -= lr * loss.d_wk;
    next.params.wv -= lr * loss.d_wv;
    next.c1 = std::max(config.c_min, state.c1 - lr * loss.d_c1);
    next.c2 = std::max(config.c_min, state.c2 - lr * loss.d_c2);
    return {std::move(next), trace};
}

PredictionTable build_predictions(const Dataset& data, const TrainData& train,
                                  const AttentionParams& params) {
    PredictionTable table;
    table.reserve(data.samples.size());
    for (const auto& sample : data.samples) {
        const FeatureTree visual = cross_attention_extract(sample.text, sample.stack, params);
        PredictionRecord record;
        record.truth_leaf = concat_labels(sample.labels, sample.labels.size());
        record.scores[train.taxonomy.root()] = 0.0;
        for (const auto& node : train.taxonomy.nodes()) {
            if (node == train.taxonomy.root()) continue;
            const int level = train.taxonomy.depth(node) - 1;
            const auto& cand = train.candidates[static_cast<std::size_t>(level)];
            const auto it = cand.index.find(node);
            if (it == cand.index.end()) {
                throw ContractViolation("build_predictions: no prototype for node '" +
                                        node + "'");
            }
            record.scores[node] = cosine(visual.features.row(level).transpose(),
                                         cand.prototypes.row(it->second).transpose());
        }
        table.push_back(std::move(record));
    }
    return table;
}

ExperimentResult run_experiment(const TrainConfig& config) {
    config.validate();

    Dataset train_set;
    Dataset eval_set;
    if (config.data_path.empty()) {
        SyntheticSpec spec = config.synthetic;
        spec.seed = config.seed;
        train_set = synthesize_dataset(spec);
        spec.seed = config.seed + kEvalSeedOffset;
        eval_set = synthesize_dataset(spec);
    } else {
        train_set = read_dataset_jsonl(config.data_path);
        eval_set = read_dataset_jsonl(config.eval_data_path);
    }

    TrainData data(std::move(train_set));
    TrainState state{init_attention(data.dataset.dim, config.seed), config.c1_init,
                     config.c2_init};

    ExperimentResult result;
    result.traces.reserve(static_cast<std::size_t>(config.epochs));
    for (int step = 0; step < config.epochs; ++step) {
        auto [next, trace] = train_step(state, data, config, step);
        state = std::move(next);
        result.traces.push_back(trace);
    }
    result.final_state = state;

    const PredictionTable preds = build_predictions(eval_set, data, state.params);
    result.metrics =
        evaluate(data.taxonomy, preds, config.treecut_count, config.seed);

    const StepTrace& last = result.traces.back();
    result.report = {{"config", config.to_json()},
                     {"metrics", result.metrics.to_json()},
                     {"final",
                      {{"c1", state.c1},
                       {"c2", state.c2},
                       {"c3_star", last.c3_star},
                       {"total_loss", last.total},
                       {"cross_modal", last.cross_modal}}},
                     {"num_steps", config.epochs},
                     {"num_train_samples", data.dataset.samples.size()},
                     {"num_eval_samples", preds.size()}};
    return result;
}

void write_experiment(const ExperimentResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/report.json");
        if (!out) throw ContractViolation("cannot write report to " + out_dir);
        out << result.report.dump(2) << '\n';
    }
    {
        std::ofstream out(out_dir + "/traces.jsonl");
        if (!out) throw ContractViolation("cannot write traces to " + out_dir);
        for (const auto& trace : result.traces) out << trace.to_json().dump() << '\n';
    }
}

} // namespace treealign
