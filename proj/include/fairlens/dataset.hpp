#ifndef FAIRLENS_DATASET_HPP
#define FAIRLENS_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fairlens {

/// One observation: subgroup label, test/model score, ground-truth target,
/// optional binary decision, optional binary item responses and extra numeric
/// columns (both parallel to the id lists held by the owning Dataset).
struct Record {
    std::string group;
    double score = 0.0;
    double target = 0.0;
    std::optional<int> decision;
    std::vector<std::uint8_t> items;
    std::vector<double> extras;

    bool operator==(const Record&) const = default;
};

/// Immutable-after-construction table of records. Criteria treat it as
/// read-only; the only mutating operation anywhere produces a fresh copy.
struct Dataset {
    std::vector<std::string> item_ids;
    std::vector<std::string> extra_columns;
    std::vector<Record> records;

    std::size_t size() const { return records.size(); }
    bool has_items() const { return !item_ids.empty(); }
    bool has_decision() const;

    /// Distinct group labels, sorted.
    std::vector<std::string> groups() const;
    std::map<std::string, std::size_t> group_sizes() const;

    /// Values of a named column: "score", "target", "decision", an item id,
    /// or an extra column name. Throws InvalidArgument on unknown names.
    std::vector<double> column(const std::string& name) const;
    std::size_t item_index(const std::string& item_id) const;

    /// Enforces the data-model invariants: >= 2 distinct groups, >= 2 records
    /// per group, finite scores/targets, decisions and items in {0,1},
    /// consistent per-record item/extra arity. Throws InvalidArgument.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// Column-name mapping for CSV ingestion. Item columns are found by the
/// "item_" prefix; any other unmapped column is kept as a numeric extra.
struct CsvSchema {
    std::string group = "group";
    std::string score = "score";
    std::string target = "target";
    std::string decision = "decision";
};

/// Parses delimited text with a header row into a validated Dataset.
/// Errors carry the 1-based data row index that caused the rejection.
Dataset load_dataset(std::istream& in, const CsvSchema& schema = {});
Dataset load_dataset_string(const std::string& text, const CsvSchema& schema = {});
Dataset load_dataset_file(const std::string& path, const CsvSchema& schema = {});

/// Canonical CSV form: group,score,target[,decision][,items...][,extras...],
/// numbers formatted so that reloading round-trips bit-exactly.
void write_csv(const Dataset& dataset, std::ostream& out);
std::string to_csv(const Dataset& dataset);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

} // namespace fairlens

#endif
