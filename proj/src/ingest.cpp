#include "botdetect/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "botdetect/random.hpp"

namespace botdetect {

namespace {

// Splits one CSV record. Handles double-quoted fields with "" escapes;
// embedded newlines are not supported.
std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

}  // namespace

void Dataset::validate() const {
    if (labels.empty()) throw std::invalid_argument("dataset has no rows");
    if (features.cols() < 1) throw std::invalid_argument("dataset has no feature columns");
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw std::invalid_argument("feature row count does not match label count");
    }
    if (feature_names.size() != cols()) {
        throw std::invalid_argument("feature name count does not match column count");
    }
    if (!features.allFinite()) throw std::invalid_argument("dataset contains non-finite values");
}

Dataset read_flows(std::istream& in, const LoadOptions& options) {
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) {
        throw IngestError("empty input: header row missing");
    }
    const auto header = split_record(line);
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) {
        position.emplace(std::string(trim(header[i])), i);
    }

    const auto label_it = position.find(options.label_column);
    if (label_it == position.end()) {
        throw IngestError("label column '" + options.label_column + "' not found in header");
    }
    const std::size_t label_pos = label_it->second;

    std::vector<std::size_t> columns;
    std::vector<std::string> names;
    if (options.include.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i == label_pos) continue;
            columns.push_back(i);
            names.emplace_back(trim(header[i]));
        }
    } else {
        for (const auto& name : options.include) {
            const auto it = position.find(name);
            if (it == position.end()) {
                throw IngestError("feature column '" + name + "' not found in header");
            }
            if (it->second == label_pos) {
                throw IngestError("label column '" + name + "' cannot also be a feature");
            }
            columns.push_back(it->second);
            names.push_back(name);
        }
    }
    if (columns.empty()) throw IngestError("no feature columns selected");

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_record(line);
        if (fields.size() != header.size()) {
            throw IngestError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, found " +
                              std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const auto& cell = fields[columns[j]];
            const auto value = parse_number(cell);
            if (!value) {
                throw IngestError("line " + std::to_string(line_no) + ", column '" + names[j] +
                                  "': not a finite number: '" + cell + "'");
            }
            values.push_back(*value);
        }
        const std::string label(trim(fields[label_pos]));
        if (label == options.positive_label) {
            labels.push_back(kAttack);
        } else if (options.negative_label ? label == *options.negative_label : !label.empty()) {
            labels.push_back(kNormal);
        } else {
            throw IngestError("line " + std::to_string(line_no) + ", column '" +
                              options.label_column + "': unknown label '" + label + "'");
        }
    }
    if (labels.empty()) throw IngestError("input has a header but no data rows");

    Dataset d;
    d.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), static_cast<Eigen::Index>(labels.size()),
        static_cast<Eigen::Index>(columns.size()));
    d.labels = std::move(labels);
    d.feature_names = std::move(names);
    return d;
}

Dataset load_flows(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");
    return read_flows(in, options);
}

Dataset load_flows(const std::string& path, const std::string& label_column,
                   const std::string& positive_label) {
    return load_flows(path, LoadOptions{label_column, positive_label, std::nullopt, {}});
}

void write_flows(std::ostream& out, const Dataset& d, const std::string& label_column,
                 const std::string& positive_label, const std::string& negative_label,
                 std::optional<int> precision) {
    for (const auto& name : d.feature_names) out << name << ',';
    out << label_column << '\n';
    char buf[64];
    for (std::size_t i = 0; i < d.rows(); ++i) {
        for (std::size_t j = 0; j < d.cols(); ++j) {
            const double v = d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const auto res = precision
                                 ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, *precision)
                                 : std::to_chars(buf, buf + sizeof buf, v);
            out.write(buf, res.ptr - buf);
            out << ',';
        }
        out << (d.labels[i] == kAttack ? positive_label : negative_label) << '\n';
    }
}

ClassCounts class_counts(std::span<const int> labels) {
    ClassCounts counts;
    for (int y : labels) ++counts[y];
    return counts;
}

ClassCounts class_counts(const Dataset& d) { return class_counts(d.labels); }

Dataset subset(const Dataset& d, std::span<const std::size_t> indices) {
    Dataset out;
    out.feature_names = d.feature_names;
    out.features.resize(static_cast<Eigen::Index>(indices.size()), d.features.cols());
    out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= d.rows()) throw std::out_of_range("subset index out of range");
        out.features.row(static_cast<Eigen::Index>(i)) = d.features.row(static_cast<Eigen::Index>(indices[i]));
        out.labels.push_back(d.labels[indices[i]]);
    }
    return out;
}

SplitPair stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("test_fraction must lie in (0, 1)");
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < d.rows(); ++i) by_class[d.labels[i]].push_back(i);

    SplitPair split;
    split.seed = seed;
    Engine rng(seed);
    for (auto& [cls, members] : by_class) {
        if (members.size() < 2) {
            throw std::invalid_argument("class " + std::to_string(cls) +
                                        " has fewer than 2 instances; cannot stratify");
        }
        shuffle(std::span(members), rng);
        auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
        n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
        split.test_index.insert(split.test_index.end(), members.begin(), members.begin() + n_test);
        split.train_index.insert(split.train_index.end(), members.begin() + n_test, members.end());
    }
    std::sort(split.train_index.begin(), split.train_index.end());
    std::sort(split.test_index.begin(), split.test_index.end());
    split.train = subset(d, split.train_index);
    split.test = subset(d, split.test_index);
    return split;
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("need at least 2 folds");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::vector<std::size_t> fold_of(labels.size());
    Engine rng(seed);
    std::size_t next = 0;
    for (auto& [cls, members] : by_class) {
        if (members.size() < folds) {
            throw std::invalid_argument("class " + std::to_string(cls) + " has fewer instances than folds");
        }
        shuffle(std::span(members), rng);
        // Continue dealing where the previous class stopped so fold sizes stay even.
        for (std::size_t idx : members) fold_of[idx] = next++ % folds;
    }
    return fold_of;
}

Dataset sample_class(const Dataset& d, int cls, std::size_t keep, std::uint64_t seed) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (d.labels[i] == cls) members.push_back(i);
    }
    if (keep >= members.size()) return d;
    Engine rng(seed);
    shuffle(std::span(members), rng);
    members.resize(keep);
    std::vector<char> kept(d.rows(), 1);
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (d.labels[i] == cls) kept[i] = 0;
    }
    for (std::size_t i : members) kept[i] = 1;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (kept[i]) rows.push_back(i);
    }
    return subset(d, rows);
}

}  // namespace botdetect
