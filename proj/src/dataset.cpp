#include "fairlens/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <system_error>

#include "fairlens/error.hpp"

namespace fairlens {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::optional<double> parse_number(const std::string& text) {
    const char* first = text.data();
    const char* last = first + text.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty()) {
        if (text == "inf") return std::numeric_limits<double>::infinity();
        if (text == "-inf") return -std::numeric_limits<double>::infinity();
        return std::nullopt;
    }
    return value;
}

[[noreturn]] void reject(std::size_t row, const std::string& why) {
    throw ParseError("row " + std::to_string(row) + ": " + why);
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

bool Dataset::has_decision() const {
    return !records.empty() && records.front().decision.has_value();
}

std::vector<std::string> Dataset::groups() const {
    std::set<std::string> labels;
    for (const auto& r : records) labels.insert(r.group);
    return {labels.begin(), labels.end()};
}

std::map<std::string, std::size_t> Dataset::group_sizes() const {
    std::map<std::string, std::size_t> sizes;
    for (const auto& r : records) ++sizes[r.group];
    return sizes;
}

std::size_t Dataset::item_index(const std::string& item_id) const {
    auto it = std::find(item_ids.begin(), item_ids.end(), item_id);
    if (it == item_ids.end()) throw InvalidArgument("unknown item id: " + item_id);
    return static_cast<std::size_t>(it - item_ids.begin());
}

std::vector<double> Dataset::column(const std::string& name) const {
    std::vector<double> out;
    out.reserve(records.size());
    if (name == "score") {
        for (const auto& r : records) out.push_back(r.score);
        return out;
    }
    if (name == "target") {
        for (const auto& r : records) out.push_back(r.target);
        return out;
    }
    if (name == "decision") {
        if (!has_decision()) throw InvalidArgument("dataset has no decision column");
        for (const auto& r : records) out.push_back(static_cast<double>(*r.decision));
        return out;
    }
    if (auto it = std::find(item_ids.begin(), item_ids.end(), name); it != item_ids.end()) {
        const auto idx = static_cast<std::size_t>(it - item_ids.begin());
        for (const auto& r : records) out.push_back(static_cast<double>(r.items[idx]));
        return out;
    }
    if (auto it = std::find(extra_columns.begin(), extra_columns.end(), name);
        it != extra_columns.end()) {
        const auto idx = static_cast<std::size_t>(it - extra_columns.begin());
        for (const auto& r : records) out.push_back(r.extras[idx]);
        return out;
    }
    throw InvalidArgument("unknown column: " + name);
}

void Dataset::validate() const {
    const bool with_decision = has_decision();
    std::map<std::string, std::size_t> sizes;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const Record& r = records[i];
        const std::size_t row = i + 1;
        if (!std::isfinite(r.score)) reject(row, "score is not finite");
        if (!std::isfinite(r.target)) reject(row, "target is not finite");
        if (r.decision.has_value() != with_decision)
            reject(row, "decision present on some rows but not all");
        if (r.decision && *r.decision != 0 && *r.decision != 1)
            reject(row, "decision value must be 0 or 1");
        if (r.items.size() != item_ids.size())
            reject(row, "inconsistent item columns");
        for (auto v : r.items)
            if (v != 0 && v != 1) reject(row, "item value must be 0 or 1");
        if (r.extras.size() != extra_columns.size())
            reject(row, "inconsistent extra columns");
        ++sizes[r.group];
    }
    if (sizes.size() < 2)
        throw InvalidArgument("dataset needs at least 2 distinct group labels, got " +
                              std::to_string(sizes.size()));
    for (const auto& [label, n] : sizes)
        if (n < 2)
            throw InvalidArgument("group '" + label + "' has " + std::to_string(n) +
                                  " record(s); every group needs at least 2");
}

Dataset load_dataset(std::istream& in, const CsvSchema& schema) {
    std::string header_line;
    if (!std::getline(in, header_line)) throw ParseError("empty input: no header row");
    const auto header = split_line(header_line);

    auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };

    const auto group_col = find_col(schema.group);
    const auto score_col = find_col(schema.score);
    const auto target_col = find_col(schema.target);
    const auto decision_col = find_col(schema.decision);
    if (!group_col) throw ParseError("missing column: " + schema.group);
    if (!score_col) throw ParseError("missing column: " + schema.score);
    if (!target_col) throw ParseError("missing column: " + schema.target);

    Dataset out;
    std::vector<std::size_t> item_cols;
    std::vector<std::size_t> extra_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == *group_col || c == *score_col || c == *target_col) continue;
        if (decision_col && c == *decision_col) continue;
        if (header[c].rfind("item_", 0) == 0) {
            out.item_ids.push_back(header[c]);
            item_cols.push_back(c);
        } else {
            out.extra_columns.push_back(header[c]);
            extra_cols.push_back(c);
        }
    }

    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto fields = split_line(line);
        if (fields.size() != header.size())
            reject(row, "expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        Record r;
        r.group = fields[*group_col];
        if (r.group.empty()) reject(row, "empty group label");

        const auto score = parse_number(fields[*score_col]);
        if (!score) reject(row, "non-numeric score '" + fields[*score_col] + "'");
        const auto target = parse_number(fields[*target_col]);
        if (!target) reject(row, "non-numeric target '" + fields[*target_col] + "'");
        r.score = *score;
        r.target = *target;
        if (!std::isfinite(r.score)) reject(row, "score is not finite");
        if (!std::isfinite(r.target)) reject(row, "target is not finite");

        if (decision_col) {
            const std::string& d = fields[*decision_col];
            if (d == "0")
                r.decision = 0;
            else if (d == "1")
                r.decision = 1;
            else
                reject(row, "unknown decision value '" + d + "'");
        }
        for (auto c : item_cols) {
            const std::string& v = fields[c];
            if (v == "0")
                r.items.push_back(0);
            else if (v == "1")
                r.items.push_back(1);
            else
                reject(row, "item column '" + header[c] + "' value '" + v +
                                "' is not 0 or 1");
        }
        for (auto c : extra_cols) {
            const auto v = parse_number(fields[c]);
            if (!v) reject(row, "non-numeric value '" + fields[c] + "' in column '" +
                                    header[c] + "'");
            r.extras.push_back(*v);
        }
        out.records.push_back(std::move(r));
    }
    out.validate();
    return out;
}

Dataset load_dataset_string(const std::string& text, const CsvSchema& schema) {
    std::istringstream in(text);
    return load_dataset(in, schema);
}

Dataset load_dataset_file(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open input file: " + path);
    return load_dataset(in, schema);
}

void write_csv(const Dataset& dataset, std::ostream& out) {
    out << "group,score,target";
    const bool with_decision = dataset.has_decision();
    if (with_decision) out << ",decision";
    for (const auto& id : dataset.item_ids) out << ',' << id;
    for (const auto& name : dataset.extra_columns) out << ',' << name;
    out << '\n';
    for (const auto& r : dataset.records) {
        out << r.group << ',' << format_double(r.score) << ',' << format_double(r.target);
        if (with_decision) out << ',' << *r.decision;
        for (auto v : r.items) out << ',' << int(v);
        for (auto v : r.extras) out << ',' << format_double(v);
        out << '\n';
    }
}

std::string to_csv(const Dataset& dataset) {
    std::ostringstream out;
    write_csv(dataset, out);
    return out.str();
}

} // namespace fairlens
