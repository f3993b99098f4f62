#pragma once

#include <string>
#include <variant>
#include <vector>

#include "uq/dataset.hpp"

namespace uq {

enum class Domain { id, ood };

// Per-pass logits produced by some external model, in long form. Sample i
// owns logits[i], a T x K matrix (pass-major). label -1 means absent.
struct LogitDump {
    std::vector<std::string> sample_ids;
    std::vector<int> labels;
    std::vector<Domain> domains;
    std::vector<Matrix> logits;
    std::size_t passes = 0;   // T
    std::size_t classes = 0;  // K

    std::size_t size() const { return sample_ids.size(); }
};

using CsvContent = std::variant<LabeledDataset, LogitDump>;

// Parses either schema by looking at the header row:
//   features: x0,..,x{d-1},label
//   logits:   sample_id,label,domain,t,k,value   (domain in {id, ood})
// Throws ParseError (with line/column), SchemaError (naming the column) or
// InconsistentShape.
CsvContent load_csv(const std::string& path);

void save_features_csv(const std::string& path, const LabeledDataset& ds);
void save_logits_csv(const std::string& path, const LogitDump& dump);

// Locale-independent shortest round-trip formatting used for every CSV and
// text artifact this project writes.
std::string format_double(double v);

const char* domain_name(Domain d);

}  // namespace uq
