#pragma once

#include <iosfwd>
#include <string>

#include "treealign/synthetic.hpp"

namespace treealign {

/// JSON Lines schema, one record per sample:
///   {"token_stack": [[d doubles] x (m+1)], "layer_ids": [m+1 ints],
///    "text_tree": [[d doubles] x H], "labels": [H strings]}
void write_dataset_jsonl(const Dataset& data, std::ostream& out);
void write_dataset_jsonl(const Dataset& data, const std::string& path);

Dataset read_dataset_jsonl(std::istream& in);
Dataset read_dataset_jsonl(const std::string& path);

} // namespace treealign
