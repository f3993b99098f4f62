#include "uq/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "uq/error.hpp"

namespace uq {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, std::size_t line_no, std::size_t col_no) {
    double v = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || s.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(col_no) +
                         ": '" + s + "' is not a number");
    }
    return v;
}

long parse_long(const std::string& s, std::size_t line_no, std::size_t col_no) {
    long v = 0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || s.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(col_no) +
                         ": '" + s + "' is not an integer");
    }
    return v;
}

LabeledDataset load_features(std::ifstream& in, std::size_t dim) {
    std::vector<double> values;
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != dim + 1) {
            throw InconsistentShape("line " + std::to_string(line_no) + ": expected " +
                                    std::to_string(dim + 1) + " fields, got " +
                                    std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < dim; ++j) {
            const double v = parse_double(fields[j], line_no, j + 1);
            if (!std::isfinite(v)) {
                throw ParseError("line " + std::to_string(line_no) + ", column " +
                                 std::to_string(j + 1) + ": non-finite value");
            }
            values.push_back(v);
        }
        const long lab = parse_long(fields[dim], line_no, dim + 1);
        if (lab < 0) {
            throw ParseError("line " + std::to_string(line_no) + ", column " +
                             std::to_string(dim + 1) + ": negative label");
        }
        labels.push_back(static_cast<int>(lab));
    }
    if (labels.empty()) {
        throw InconsistentShape("feature file has a header but no data rows");
    }
    LabeledDataset ds;
    ds.class_count = *std::max_element(labels.begin(), labels.end()) + 1;
    ds.features = Matrix(labels.size(), dim, std::move(values));
    ds.labels = std::move(labels);
    return ds;
}

LogitDump load_logits(std::ifstream& in) {
    struct Rec {
        int label = -1;
        Domain domain = Domain::id;
        std::vector<std::size_t> ts, ks;
        std::vector<double> values;
    };
    std::vector<std::string> order;
    std::map<std::string, Rec> recs;

    std::string line;
    std::size_t line_no = 1;
    std::size_t max_t = 0, max_k = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != 6) {
            throw InconsistentShape("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                                    std::to_string(fields.size()));
        }
        const std::string& sid = fields[0];
        if (sid.empty()) {
            throw ParseError("line " + std::to_string(line_no) + ", column 1: empty sample_id");
        }
        int label = -1;
        if (!fields[1].empty()) {
            const long l = parse_long(fields[1], line_no, 2);
            label = static_cast<int>(l);
        }
        Domain dom;
        if (fields[2] == "id") {
            dom = Domain::id;
        } else if (fields[2] == "ood") {
            dom = Domain::ood;
        } else {
            throw ParseError("line " + std::to_string(line_no) +
                             ", column 3: domain must be 'id' or 'ood', got '" + fields[2] + "'");
        }
        const long t = parse_long(fields[3], line_no, 4);
        const long k = parse_long(fields[4], line_no, 5);
        if (t < 0 || k < 0) {
            throw ParseError("line " + std::to_string(line_no) + ": negative pass or class index");
        }
        const double v = parse_double(fields[5], line_no, 6);
        if (!std::isfinite(v)) {
            throw ParseError("line " + std::to_string(line_no) + ", column 6: non-finite logit");
        }

        auto [it, inserted] = recs.try_emplace(sid);
        if (inserted) {
            order.push_back(sid);
            it->second.label = label;
            it->second.domain = dom;
        } else if (it->second.label != label || it->second.domain != dom) {
            throw InconsistentShape("line " + std::to_string(line_no) + ": sample '" + sid +
                                    "' changes label or domain");
        }
        it->second.ts.push_back(static_cast<std::size_t>(t));
        it->second.ks.push_back(static_cast<std::size_t>(k));
        it->second.values.push_back(v);
        max_t = std::max(max_t, static_cast<std::size_t>(t));
        max_k = std::max(max_k, static_cast<std::size_t>(k));
    }
    if (order.empty()) {
        throw InconsistentShape("logit file has a header but no data rows");
    }

    LogitDump dump;
    dump.passes = max_t + 1;
    dump.classes = max_k + 1;
    for (const auto& sid : order) {
        const Rec& rec = recs[sid];
        Matrix m(dump.passes, dump.classes);
        std::vector<char> seen(dump.passes * dump.classes, 0);
        for (std::size_t i = 0; i < rec.values.size(); ++i) {
            const std::size_t idx = rec.ts[i] * dump.classes + rec.ks[i];
            if (seen[idx]) {
                throw InconsistentShape("sample '" + sid + "': duplicate (t=" +
                                        std::to_string(rec.ts[i]) + ", k=" +
                                        std::to_string(rec.ks[i]) + ")");
            }
            seen[idx] = 1;
            m(rec.ts[i], rec.ks[i]) = rec.values[i];
        }
        if (rec.values.size() != dump.passes * dump.classes) {
            throw InconsistentShape("sample '" + sid + "' has " +
                                    std::to_string(rec.values.size()) + " logits, expected " +
                                    std::to_string(dump.passes * dump.classes));
        }
        dump.sample_ids.push_back(sid);
        dump.labels.push_back(rec.label);
        dump.domains.push_back(rec.domain);
        dump.logits.push_back(std::move(m));
    }
    return dump;
}

}  // namespace

const char* domain_name(Domain d) { return d == Domain::id ? "id" : "ood"; }

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

CsvContent load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    std::string header;
    if (!std::getline(in, header)) {
        throw SchemaError("'" + path + "' is empty, expected a header row");
    }
    const auto cols = split_line(header);

    const std::vector<std::string> logit_cols = {"sample_id", "label", "domain", "t", "k", "value"};
    if (!cols.empty() && cols[0] == "sample_id") {
        for (std::size_t i = 0; i < logit_cols.size(); ++i) {
            if (i >= cols.size() || cols[i] != logit_cols[i]) {
                throw SchemaError("logit schema: missing or misplaced column '" + logit_cols[i] +
                                  "'");
            }
        }
        if (cols.size() != logit_cols.size()) {
            throw SchemaError("logit schema: unexpected extra column '" + cols[6] + "'");
        }
        return load_logits(in);
    }

    // Feature schema: x0..x{d-1},label.
    if (cols.size() < 2) {
        throw SchemaError("feature schema: missing column 'label'");
    }
    const std::size_t dim = cols.size() - 1;
    for (std::size_t j = 0; j < dim; ++j) {
        const std::string want = "x" + std::to_string(j);
        if (cols[j] != want) {
            throw SchemaError("feature schema: missing column '" + want + "' (got '" + cols[j] +
                              "')");
        }
    }
    if (cols[dim] != "label") {
        throw SchemaError("feature schema: missing column 'label'");
    }
    return load_features(in, dim);
}

void save_features_csv(const std::string& path, const LabeledDataset& ds) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    for (std::size_t j = 0; j < ds.dim(); ++j) out << "x" << j << ",";
    out << "label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto row = ds.features.row(i);
        for (std::size_t j = 0; j < ds.dim(); ++j) out << format_double(row[j]) << ",";
        out << ds.labels[i] << "\n";
    }
}

void save_logits_csv(const std::string& path, const LogitDump& dump) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    out << "sample_id,label,domain,t,k,value\n";
    for (std::size_t i = 0; i < dump.size(); ++i) {
        for (std::size_t t = 0; t < dump.passes; ++t) {
            for (std::size_t k = 0; k < dump.classes; ++k) {
                out << dump.sample_ids[i] << ",";
                if (dump.labels[i] >= 0) out << dump.labels[i];
                out << "," << domain_name(dump.domains[i]) << "," << t << "," << k << ","
                    << format_double(dump.logits[i](t, k)) << "\n";
            }
        }
    }
}

}  // namespace uq
