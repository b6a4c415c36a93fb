#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "treealign/dataset_io.hpp"
#include "treealign/manifold_distance.hpp"
#include "treealign/metrics.hpp"
#include "treealign/taxonomy.hpp"
#include "treealign/trainer.hpp"

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw treealign::ContractViolation("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw treealign::ContractViolation(path + ": " + e.what());
    }
    return j;
}

void write_output(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw treealign::ContractViolation("cannot write " + path);
    out << j.dump(2) << '\n';
}

treealign::PredictionTable read_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw treealign::ContractViolation("cannot open " + path);
    treealign::PredictionTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw treealign::ContractViolation("predictions line " +
                                               std::to_string(line_no) + ": " + e.what());
        }
        treealign::PredictionRecord p;
        p.truth_leaf = record.at("truth_leaf").get<std::string>();
        for (const auto& [id, score] : record.at("scores").items()) {
            p.scores[id] = score.get<double>();
        }
        table.push_back(std::move(p));
    }
    return table;
}

std::vector<std::vector<std::string>> read_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw treealign::ContractViolation("cannot open " + path);
    std::vector<std::vector<std::string>> tuples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw treealign::ContractViolation("annotations line " +
                                               std::to_string(line_no) + ": " + e.what());
        }
        tuples.push_back(record.at("labels").get<std::vector<std::string>>());
    }
    return tuples;
}

treealign::SyntheticSpec spec_from_json(const json& j) {
    treealign::SyntheticSpec spec;
    spec.branching = j.value("branching", spec.branching);
    spec.dim = j.value("dim", spec.dim);
    spec.separation = j.value("separation", spec.separation);
    spec.noise = j.value("noise", spec.noise);
    spec.samples_per_leaf = j.value("samples_per_leaf", spec.samples_per_leaf);
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

int run(int argc, char** argv) {
    CLI::App app{"Hierarchical cross-modal alignment on hyperbolic manifolds"};
    app.require_subcommand(1);

    // solve-curvature
    auto* solve = app.add_subcommand("solve-curvature",
                                     "Solve for the intermediate curvature");
    double c1 = 0.0, c2 = 0.0, r = 0.0, tol = 1e-8;
    double c_min = treealign::Curvature::kDefaultFloor;
    solve->add_option("--c1", c1, "Text curvature")->required();
    solve->add_option("--c2", c2, "Visual curvature")->required();
    solve->add_option("--r", r, "Radius parameter")->required();
    solve->add_option("--tol", tol, "Golden-section tolerance");
    solve->add_option("--c-min", c_min, "Curvature floor");
    solve->callback([&] {
        const treealign::IntermediateSolution sol = treealign::solve_intermediate(
            treealign::Curvature(c1, c_min), treealign::Curvature(c2, c_min),
            treealign::RadiusParameter(r, treealign::RadiusParameter::Source::fixed),
            tol, c_min);
        const treealign::ConvexityCertificate cert = treealign::r_min_threshold(
            treealign::Curvature(c1, c_min), treealign::Curvature(c2, c_min), c_min);
        json out{{"c3_star", sol.c3_star.value()},
                 {"dc3_dc1", sol.dc3_dc1},
                 {"dc3_dc2", sol.dc3_dc2},
                 {"objective_value", sol.objective_value},
                 {"bracket", {sol.bracket_low, sol.bracket_high}},
                 {"iterations", sol.iterations},
                 {"certificate_satisfied", sol.certificate_satisfied},
                 {"r_min_star", cert.r_min_star},
                 {"binding_term", treealign::binding_term_name(cert.binding_term)}};
        std::cout << out.dump(2) << '\n';
    });

    // make-synthetic
    auto* make = app.add_subcommand("make-synthetic", "Generate a synthetic dataset");
    std::string spec_path, out_path;
    make->add_option("--spec", spec_path, "Synthetic spec JSON")->required();
    make->add_option("--out", out_path, "Output JSONL path")->required();
    make->callback([&] {
        const treealign::Dataset data =
            treealign::synthesize_dataset(spec_from_json(read_json_file(spec_path)));
        treealign::write_dataset_jsonl(data, out_path);
    });

    // train
    auto* train = app.add_subcommand("train", "Run a training experiment");
    std::string config_path, out_dir;
    train->add_option("--config", config_path, "Train config JSON")->required();
    train->add_option("--out-dir", out_dir, "Output directory")->required();
    train->callback([&] {
        const treealign::TrainConfig config =
            treealign::TrainConfig::from_json(read_json_file(config_path));
        const treealign::ExperimentResult result = treealign::run_experiment(config);
        treealign::write_experiment(result, out_dir);
        std::cout << result.report.at("metrics").dump(2) << '\n';
    });

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate predictions against a taxonomy");
    std::string tax_path, pred_path, eval_out;
    int treecuts = 25;
    std::uint64_t eval_seed = 0;
    eval->add_option("--taxonomy", tax_path, "Taxonomy JSON")->required();
    eval->add_option("--predictions", pred_path, "Predictions JSONL")->required();
    eval->add_option("--treecuts", treecuts, "Number of sampled treecuts");
    eval->add_option("--seed", eval_seed, "Treecut sampling seed");
    eval->add_option("--out", eval_out, "Write the metric report here");
    eval->callback([&] {
        const treealign::Taxonomy tax =
            treealign::Taxonomy::from_json(read_json_file(tax_path));
        const treealign::PredictionTable preds = read_predictions(pred_path);
        const treealign::MetricReport report =
            treealign::evaluate(tax, preds, treecuts, eval_seed);
        write_output(report.to_json(), eval_out);
    });

    // taxonomy build / split
    auto* taxonomy = app.add_subcommand("taxonomy", "Taxonomy utilities");
    taxonomy->require_subcommand(1);

    auto* build = taxonomy->add_subcommand("build", "Build a taxonomy from annotations");
    std::string ann_path, build_out;
    build->add_option("--annotations", ann_path,
                      "JSONL with per-sample 'labels' arrays")->required();
    build->add_option("--out", build_out, "Write the taxonomy here");
    build->callback([&] {
        const treealign::Taxonomy tax =
            treealign::Taxonomy::from_annotations(read_annotations(ann_path));
        write_output(tax.to_json(), build_out);
    });

    auto* split = taxonomy->add_subcommand("split", "Split leaves into base and novel trees");
    std::string split_tax, out_base, out_novel;
    std::uint64_t split_seed = 0;
    split->add_option("--taxonomy", split_tax, "Taxonomy JSON")->required();
    split->add_option("--seed", split_seed, "Shuffle seed");
    split->add_option("--out-base", out_base, "Base tree output")->required();
    split->add_option("--out-novel", out_novel, "Novel tree output")->required();
    split->callback([&] {
        const treealign::Taxonomy tax =
            treealign::Taxonomy::from_json(read_json_file(split_tax));
        const auto [base, novel] = treealign::base_novel_split(tax, split_seed);
        write_output(base.to_json(), out_base);
        write_output(novel.to_json(), out_novel);
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const treealign::ContractViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const treealign::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
