#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fraudstream/core.hpp"

namespace fraudstream {

/// A CSV cell: absent, numeric, or text.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_null(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
inline bool is_numeric(const Cell& c) { return std::holds_alternative<double>(c); }
inline bool is_text(const Cell& c) { return std::holds_alternative<std::string>(c); }

struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<Cell>> rows;
    std::string label_column;

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < column_names.size(); ++i) {
            if (column_names[i] == name) return i;
        }
        throw SchemaError("column not found: " + name);
    }
};

enum class ColumnKind { Numeric, Categorical };

struct FeatureRange {
    double min = 0.0;
    double max = 0.0;
    bool degenerate = false;  // max == min on the training split
};

struct ColumnInfo {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    double null_fraction = 0.0;
    std::size_t distinct_count = 0;
    std::vector<std::string> categories;  // categorical level per encoded index
};

struct DatasetSchema {
    std::vector<ColumnInfo> columns;  // feature columns, label excluded
    std::string label_column;
    std::vector<FeatureRange> normalization;  // per feature, set by fit_normalizer
};

struct CleanDataset {
    std::vector<LabeledRecord> records;
    DatasetSchema schema;
    double positive_fraction = 0.0;
};

namespace detail {

inline std::optional<double> lex_numeric(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size() || errno == ERANGE) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

inline Cell make_cell(const std::string& field) {
    if (field.empty()) return std::monostate{};
    if (auto v = lex_numeric(field)) return *v;
    return field;
}

// canonical text form of a cell, used for grouping categorical levels
inline std::string cell_key(const Cell& c) {
    if (is_text(c)) return std::get<std::string>(c);
    if (is_numeric(c)) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(c));
        return buf;
    }
    return std::string();
}

// RFC-4180 field splitting for one physical record; handles quoted fields
// that may span lines (reader passes in the full logical line).
inline std::vector<std::string> split_csv_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline bool has_unclosed_quote(const std::string& line) {
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') {
            if (in_quotes && i + 1 < line.size() && line[i + 1] == '"') {
                ++i;
            } else {
                in_quotes = !in_quotes;
            }
        }
    }
    return in_quotes;
}

}  // namespace detail

/// Reads a CSV file (header row, comma delimiter, RFC-4180 quoting).
/// Numeric-looking cells parse as numbers, empty cells become nulls.
inline RawTable parse_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);

    RawTable table;
    table.label_column = label_column;

    std::string line;
    std::size_t row_number = 0;  // physical line, 1-based
    bool have_header = false;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // a quoted field may contain embedded newlines
        while (detail::has_unclosed_quote(line)) {
            std::string more;
            if (!std::getline(in, more)) throw ParseError("unterminated quoted field", row_number);
            ++row_number;
            if (!more.empty() && more.back() == '\r') more.pop_back();
            line.push_back('\n');
            line += more;
        }
        auto fields = detail::split_csv_record(line);
        if (!have_header) {
            table.column_names = fields;
            have_header = true;
            continue;
        }
        if (fields.size() != table.column_names.size()) {
            throw ParseError("ragged row: expected " + std::to_string(table.column_names.size()) +
                                 " cells, got " + std::to_string(fields.size()),
                             row_number);
        }
        std::vector<Cell> row;
        row.reserve(fields.size());
        for (auto& f : fields) row.push_back(detail::make_cell(f));
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw ParseError("missing header row", 0);
    table.column_index(label_column);  // throws SchemaError if absent
    return table;
}

/// Per-column summary of the current table contents.
inline std::vector<ColumnInfo> column_summary(const RawTable& table) {
    std::vector<ColumnInfo> out(table.column_names.size());
    for (std::size_t c = 0; c < table.column_names.size(); ++c) {
        ColumnInfo& info = out[c];
        info.name = table.column_names[c];
        std::size_t nulls = 0;
        bool any_text = false;
        std::map<std::string, std::size_t> distinct;
        for (const auto& row : table.rows) {
            const Cell& cell = row[c];
            if (is_null(cell)) {
                ++nulls;
                continue;
            }
            any_text |= is_text(cell);
            ++distinct[detail::cell_key(cell)];
        }
        info.null_fraction = table.rows.empty()
                                 ? 0.0
                                 : static_cast<double>(nulls) / static_cast<double>(table.rows.size());
        info.distinct_count = distinct.size();
        info.kind = any_text ? ColumnKind::Categorical : ColumnKind::Numeric;
    }
    return out;
}

/// Data cleansing. Fixed order: (1) drop feature columns with more than
/// `null_drop_threshold` nulls, (2) remove exact-duplicate rows keeping the
/// first occurrence, (3) drop feature columns with a single distinct non-null
/// value, (4) remove rows that still contain a null. The label column is never
/// dropped.
inline RawTable cleanse(const RawTable& table, double null_drop_threshold = 0.90) {
    if (table.rows.empty()) throw EmptyDatasetError("cleanse: empty table");

    RawTable cur = table;

    auto drop_columns = [&](const std::vector<bool>& drop) {
        RawTable next;
        next.label_column = cur.label_column;
        for (std::size_t c = 0; c < cur.column_names.size(); ++c) {
            if (!drop[c]) next.column_names.push_back(cur.column_names[c]);
        }
        next.rows.reserve(cur.rows.size());
        for (const auto& row : cur.rows) {
            std::vector<Cell> nrow;
            nrow.reserve(next.column_names.size());
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (!drop[c]) nrow.push_back(row[c]);
            }
            next.rows.push_back(std::move(nrow));
        }
        cur = std::move(next);
    };

    const std::size_t label_at_start = cur.column_index(cur.label_column);

    // (1) mostly-null feature columns
    {
        auto stats = column_summary(cur);
        std::vector<bool> drop(cur.column_names.size(), false);
        for (std::size_t c = 0; c < stats.size(); ++c) {
            drop[c] = c != label_at_start && stats[c].null_fraction > null_drop_threshold;
        }
        drop_columns(drop);
    }

    // (2) exact duplicates, first occurrence kept
    {
        std::set<std::vector<Cell>> seen;
        std::vector<std::vector<Cell>> kept;
        kept.reserve(cur.rows.size());
        for (auto& row : cur.rows) {
            if (seen.insert(row).second) kept.push_back(std::move(row));
        }
        cur.rows = std::move(kept);
    }

    // (3) constant feature columns
    {
        const std::size_t label_at = cur.column_index(cur.label_column);
        auto stats = column_summary(cur);
        std::vector<bool> drop(cur.column_names.size(), false);
        for (std::size_t c = 0; c < stats.size(); ++c) {
            drop[c] = c != label_at && stats[c].distinct_count <= 1;
        }
        drop_columns(drop);
    }

    // (4) rows with remaining nulls
    {
        std::vector<std::vector<Cell>> kept;
        kept.reserve(cur.rows.size());
        for (auto& row : cur.rows) {
            if (std::none_of(row.begin(), row.end(), is_null)) kept.push_back(std::move(row));
        }
        cur.rows = std::move(kept);
    }

    if (cur.rows.empty()) throw EmptyDatasetError("cleanse: all rows removed");
    return cur;
}

/// Replaces every categorical feature column by integer level indices,
/// ordered by descending frequency with lexical tie-break. Returns the
/// encoded table; level lists in index order come out via `column_summary`
/// composition in `build_dataset`.
inline RawTable encode_categoricals(const RawTable& table,
                                    std::vector<ColumnInfo>* schema_out = nullptr) {
    RawTable out = table;
    const std::size_t label_at = out.column_index(out.label_column);
    auto stats = column_summary(out);
    if (schema_out) schema_out->clear();

    for (std::size_t c = 0; c < out.column_names.size(); ++c) {
        if (c == label_at || stats[c].kind != ColumnKind::Categorical) {
            if (schema_out && c != label_at) schema_out->push_back(stats[c]);
            continue;
        }
        std::map<std::string, std::size_t> freq;
        for (const auto& row : out.rows) {
            if (!is_null(row[c])) ++freq[detail::cell_key(row[c])];
        }
        std::vector<std::pair<std::string, std::size_t>> levels(freq.begin(), freq.end());
        std::stable_sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        std::map<std::string, double> index_of;
        ColumnInfo info = stats[c];
        info.categories.clear();
        for (std::size_t i = 0; i < levels.size(); ++i) {
            index_of[levels[i].first] = static_cast<double>(i);
            info.categories.push_back(levels[i].first);
        }
        for (auto& row : out.rows) {
            if (!is_null(row[c])) row[c] = index_of.at(detail::cell_key(row[c]));
        }
        if (schema_out) schema_out->push_back(info);
    }
    return out;
}

/// Converts an encoded (all-numeric) table into records. Label cells must be
/// 0/1 or one of the configured aliases.
struct LabelAliases {
    std::vector<std::string> positive{"1", "true", "yes"};
    std::vector<std::string> negative{"0", "false", "no"};
};

inline CleanDataset build_dataset(const RawTable& table, const LabelAliases& aliases = {}) {
    CleanDataset ds;
    const std::size_t label_at = table.column_index(table.label_column);
    ds.schema.label_column = table.label_column;

    std::vector<ColumnInfo> stats = column_summary(table);
    for (std::size_t c = 0; c < stats.size(); ++c) {
        if (c != label_at) ds.schema.columns.push_back(stats[c]);
    }

    auto lower = [](std::string s) {
        for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        return s;
    };
    auto contains = [&](const std::vector<std::string>& xs, const std::string& v) {
        return std::find(xs.begin(), xs.end(), v) != xs.end();
    };

    std::size_t positives = 0;
    ds.records.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        LabeledRecord rec;
        rec.features.reserve(row.size() - 1);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == label_at) continue;
            if (!is_numeric(row[c])) {
                throw SchemaError("non-numeric feature cell in column '" + table.column_names[c] +
                                  "'; encode categoricals first");
            }
            rec.features.push_back(std::get<double>(row[c]));
        }
        const Cell& lc = row[label_at];
        if (is_numeric(lc) && (std::get<double>(lc) == 0.0 || std::get<double>(lc) == 1.0)) {
            rec.label = static_cast<int>(std::get<double>(lc));
        } else if (is_text(lc) && contains(aliases.positive, lower(std::get<std::string>(lc)))) {
            rec.label = 1;
        } else if (is_text(lc) && contains(aliases.negative, lower(std::get<std::string>(lc)))) {
            rec.label = 0;
        } else {
            throw SchemaError("label cell does not parse as 0/1 in row " + std::to_string(r));
        }
        positives += rec.label;
        ds.records.push_back(std::move(rec));
    }
    ds.positive_fraction =
        ds.records.empty() ? 0.0 : static_cast<double>(positives) / static_cast<double>(ds.records.size());
    return ds;
}

/// Min/max per feature, fitted on the training split only.
inline std::vector<FeatureRange> fit_normalizer(const std::vector<LabeledRecord>& train) {
    if (train.empty()) throw EmptyDatasetError("fit_normalizer: empty training split");
    const std::size_t dim = train[0].features.size();
    std::vector<FeatureRange> ranges(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        double lo = train[0].features[j], hi = lo;
        for (const auto& rec : train) {
            lo = std::min(lo, rec.features[j]);
            hi = std::max(hi, rec.features[j]);
        }
        ranges[j] = FeatureRange{lo, hi, hi == lo};
    }
    return ranges;
}

/// Maps each feature to (x-min)/(max-min), clamped to [0,1]; degenerate
/// features map to 0.
inline std::vector<LabeledRecord> apply_normalizer(const std::vector<FeatureRange>& ranges,
                                                   const std::vector<LabeledRecord>& records) {
    std::vector<LabeledRecord> out = records;
    for (auto& rec : out) {
        if (rec.features.size() != ranges.size()) {
            throw DimensionError("apply_normalizer: feature dimension mismatch");
        }
        for (std::size_t j = 0; j < ranges.size(); ++j) {
            if (ranges[j].degenerate) {
                rec.features[j] = 0.0;
            } else {
                const double v = (rec.features[j] - ranges[j].min) / (ranges[j].max - ranges[j].min);
                rec.features[j] = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return out;
}

inline void set_normalization(DatasetSchema& schema, std::vector<FeatureRange> ranges) {
    schema.normalization = std::move(ranges);
}

/// Stratified 80:20-style split. Per class, round(train_fraction * count)
/// records go to train (at least one record stays on each side), chosen
/// uniformly at random under the seed; output keeps the original order.
inline std::pair<std::vector<LabeledRecord>, std::vector<LabeledRecord>> stratified_split(
    const CleanDataset& ds, double train_fraction, RngSeed seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must be in (0,1)");
    }
    std::vector<std::size_t> idx_by_class[2];
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        idx_by_class[ds.records[i].label == 1].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
        if (idx_by_class[c].size() < 2) {
            throw StratificationError("stratified_split: class " + std::to_string(c) +
                                      " has fewer than 2 records");
        }
    }

    Rng rng(seed);
    std::vector<bool> in_train(ds.records.size(), false);
    for (int c = 0; c < 2; ++c) {
        auto& idx = idx_by_class[c];
        rng.shuffle(idx);
        const auto n = idx.size();
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(n)));
        n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
        for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;
    }

    std::pair<std::vector<LabeledRecord>, std::vector<LabeledRecord>> out;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        (in_train[i] ? out.first : out.second).push_back(ds.records[i]);
    }
    return out;
}

}  // namespace fraudstream
