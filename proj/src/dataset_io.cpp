#include "treealign/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "treealign/errors.hpp"

namespace treealign {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* what) {
    if (!rows.is_array() || rows.empty()) {
        throw ContractViolation(std::string(what) + ": expected non-empty array of rows");
    }
    const auto cols = rows.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const json& row = rows[i];
        if (!row.is_array() || row.size() != cols) {
            throw ContractViolation(std::string(what) + ": ragged rows");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                row[j].get<double>();
        }
    }
    return m;
}

} // namespace

void write_dataset_jsonl(const Dataset& data, std::ostream& out) {
    for (const Sample& s : data.samples) {
        json record;
        record["token_stack"] = matrix_to_json(s.stack.tokens);
        record["layer_ids"] = s.stack.layer_ids;
        record["text_tree"] = matrix_to_json(s.text.features);
        record["labels"] = s.labels;
        out << record.dump() << '\n';
    }
}

void write_dataset_jsonl(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ContractViolation("cannot open for writing: " + path);
    write_dataset_jsonl(data, out);
}

Dataset read_dataset_jsonl(std::istream& in) {
    Dataset data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ContractViolation("dataset line " + std::to_string(line_no) +
                                    ": " + e.what());
        }
        Sample s;
        s.stack.tokens = matrix_from_json(record.at("token_stack"), "token_stack");
        s.stack.layer_ids = record.at("layer_ids").get<std::vector<int>>();
        s.text.features = matrix_from_json(record.at("text_tree"), "text_tree");
        s.labels = record.at("labels").get<std::vector<std::string>>();
        if (s.stack.layer_ids.size() != static_cast<std::size_t>(s.stack.tokens.rows())) {
            throw ContractViolation("dataset line " + std::to_string(line_no) +
                                    ": layer_ids length mismatch");
        }
        if (s.labels.size() != static_cast<std::size_t>(s.text.features.rows())) {
            throw ContractViolation("dataset line " + std::to_string(line_no) +
                                    ": labels length must equal tree depth");
        }
        if (s.stack.tokens.cols() != s.text.features.cols()) {
            throw ContractViolation("dataset line " + std::to_string(line_no) +
                                    ": token and text dimensions differ");
        }
        if (!data.samples.empty()) {
            if (s.text.features.rows() != data.depth || s.text.features.cols() != data.dim) {
                throw ContractViolation("dataset line " + std::to_string(line_no) +
                                        ": inconsistent depth or dimension");
            }
        } else {
            data.depth = static_cast<int>(s.text.features.rows());
            data.dim = static_cast<int>(s.text.features.cols());
        }
        data.samples.push_back(std::move(s));
    }
    if (data.samples.empty()) throw ContractViolation("dataset: no records");
    return data;
}

Dataset read_dataset_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("cannot open for reading: " + path);
    return read_dataset_jsonl(in);
}

} // namespace treealign
