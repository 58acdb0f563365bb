#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "prc/csv.hpp"
#include "prc/errors.hpp"
#include "prc/step_function.hpp"

namespace prc {

/// One subject's survival row. `baseline` stores one slot per baseline
/// column: the numeric value for numeric columns, or the level code
/// (index into BaselineInfo::levels) for categorical ones.
struct SurvivalRecord {
    std::string id;
    double time = 0.0;
    int event = 0;
    std::vector<double> baseline;
};

/// One longitudinal measurement row. `covariates` holds the longitudinal
/// covariate values (NaN = missing); `regressors` holds the model regressors
/// (for example age), which may not be missing.
struct LongitudinalRecord {
    std::string id;
    double fuptime = 0.0;
    std::vector<double> covariates;
    std::vector<double> regressors;
};

struct BaselineInfo {
    std::vector<std::string> names;
    std::vector<std::uint8_t> is_categorical;
    std::vector<std::vector<std::string>> levels;  // sorted; empty for numeric columns

    int index(const std::string& name) const {
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == name) return static_cast<int>(j);
        return -1;
    }
};

struct Dataset {
    std::vector<SurvivalRecord> survival;
    std::vector<LongitudinalRecord> longitudinal;
    BaselineInfo baseline;
    std::vector<std::string> covariate_names;  // longitudinal covariates
    std::vector<std::string> regressor_names;
    std::optional<double> landmark;

    int covariate_index(const std::string& name) const {
        for (std::size_t j = 0; j < covariate_names.size(); ++j)
            if (covariate_names[j] == name) return static_cast<int>(j);
        return -1;
    }

    int regressor_index(const std::string& name) const {
        for (std::size_t j = 0; j < regressor_names.size(); ++j)
            if (regressor_names[j] == name) return static_cast<int>(j);
        return -1;
    }
};

/// Column roles for the two input tables. Every column in each file must be
/// accounted for: the id/time/event/fuptime columns plus the three role lists.
struct DatasetSchema {
    std::string id_column = "id";
    std::string time_column = "time";
    std::string event_column = "event";
    std::string fuptime_column = "fuptime";
    std::vector<std::string> baseline_columns;
    std::vector<std::string> covariate_columns;
    std::vector<std::string> regressor_columns;
};

inline std::unordered_map<std::string, std::size_t> subject_index_map(const Dataset& data) {
    std::unordered_map<std::string, std::size_t> map;
    map.reserve(data.survival.size());
    for (std::size_t i = 0; i < data.survival.size(); ++i) map.emplace(data.survival[i].id, i);
    return map;
}

/// Longitudinal row indices per subject, aligned with `data.survival`.
inline std::vector<std::vector<std::size_t>> rows_by_subject(const Dataset& data) {
    auto index = subject_index_map(data);
    std::vector<std::vector<std::size_t>> rows(data.survival.size());
    for (std::size_t r = 0; r < data.longitudinal.size(); ++r) {
        auto it = index.find(data.longitudinal[r].id);
        if (it != index.end()) rows[it->second].push_back(r);
    }
    return rows;
}

namespace detail {

inline double parse_required_double(const std::string& field, const std::string& what,
                                    std::size_t row1based) {
    auto value = try_parse_double(field);
    if (!value.has_value() || std::isnan(*value))
        throw data_error(what + ": row " + std::to_string(row1based) +
                         " has missing or non-numeric value '" + field + "'");
    return *value;
}

inline void check_columns_classified(const CsvTable& table, const std::string& what,
                                     const std::vector<std::string>& known) {
    std::unordered_set<std::string> known_set(known.begin(), known.end());
    std::vector<std::string> extra;
    for (const auto& col : table.header)
        if (known_set.find(col) == known_set.end()) extra.push_back(col);
    if (!extra.empty()) {
        std::string joined;
        for (const auto& c : extra) joined += (joined.empty() ? "" : ", ") + c;
        throw data_error(what + " has unclassified column(s): " + joined +
                         " (assign a role in the schema or remove them)");
    }
}

// A baseline column is numeric iff every entry parses as a number; otherwise
// it is categorical with sorted unique levels.
inline void classify_baseline(const CsvTable& table, const std::vector<std::string>& cols,
                              const std::string& what, BaselineInfo& info) {
    info.names = cols;
    info.is_categorical.assign(cols.size(), 0);
    info.levels.assign(cols.size(), {});
    for (std::size_t j = 0; j < cols.size(); ++j) {
        int cj = table.require_column(cols[j], what);
        bool numeric = true;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const std::string& field = table.rows[r][static_cast<std::size_t>(cj)];
            if (field.empty())
                throw data_error(what + ": baseline column '" + cols[j] + "' row " +
                                 std::to_string(r + 1) + " is empty (baseline values may not be missing)");
            auto value = try_parse_double(field);
            if (!value.has_value() || std::isnan(*value)) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            std::set<std::string> levels;
            for (const auto& row : table.rows) levels.insert(row[static_cast<std::size_t>(cj)]);
            info.is_categorical[j] = 1;
            info.levels[j].assign(levels.begin(), levels.end());
        }
    }
}

inline int baseline_level_code(const BaselineInfo& info, std::size_t col, const std::string& field,
                               const std::string& subject_id) {
    const auto& levels = info.levels[col];
    auto it = std::lower_bound(levels.begin(), levels.end(), field);
    if (it == levels.end() || *it != field)
        throw data_error("unknown level '" + field + "' in baseline column '" + info.names[col] +
                         "' for subject id=" + subject_id);
    return static_cast<int>(it - levels.begin());
}

inline std::vector<LongitudinalRecord> parse_longitudinal(
    const CsvTable& table, const DatasetSchema& schema, const std::string& what) {
    std::vector<std::string> known = {schema.id_column, schema.fuptime_column};
    known.insert(known.end(), schema.covariate_columns.begin(), schema.covariate_columns.end());
    known.insert(known.end(), schema.regressor_columns.begin(), schema.regressor_columns.end());
    check_columns_classified(table, what, known);

    int id_col = table.require_column(schema.id_column, what);
    int fup_col = table.require_column(schema.fuptime_column, what);
    std::vector<int> cov_cols, reg_cols;
    for (const auto& name : schema.covariate_columns)
        cov_cols.push_back(table.require_column(name, what));
    for (const auto& name : schema.regressor_columns)
        reg_cols.push_back(table.require_column(name, what));

    std::vector<LongitudinalRecord> records;
    records.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        LongitudinalRecord rec;
        rec.id = row[static_cast<std::size_t>(id_col)];
        if (rec.id.empty())
            throw data_error(what + ": row " + std::to_string(r + 1) + " has an empty id");
        rec.fuptime = parse_required_double(row[static_cast<std::size_t>(fup_col)],
                                            what + " column '" + schema.fuptime_column + "'", r + 1);
        if (rec.fuptime < 0.0)
            throw data_error(what + ": row " + std::to_string(r + 1) + " has negative " +
                             schema.fuptime_column);
        rec.covariates.reserve(cov_cols.size());
        for (std::size_t j = 0; j < cov_cols.size(); ++j) {
            const std::string& field = row[static_cast<std::size_t>(cov_cols[j])];
            auto value = try_parse_double(field);
            if (field.empty()) {
                rec.covariates.push_back(std::numeric_limits<double>::quiet_NaN());
            } else if (!value.has_value()) {
                throw data_error(what + ": column '" + schema.covariate_columns[j] + "' row " +
                                 std::to_string(r + 1) + " has non-numeric value '" + field + "'");
            } else {
                rec.covariates.push_back(*value);
            }
        }
        rec.regressors.reserve(reg_cols.size());
        for (std::size_t j = 0; j < reg_cols.size(); ++j)
            rec.regressors.push_back(parse_required_double(
                row[static_cast<std::size_t>(reg_cols[j])],
                what + " column '" + schema.regressor_columns[j] + "'", r + 1));
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace detail

/// Parses the two-table representation into a Dataset, checking structure:
/// unique subject ids, complete column classification, event in {0,1},
/// non-negative times, and that every longitudinal id has a survival row.
inline Dataset load_dataset(const CsvTable& survival_table, const CsvTable& longitudinal_table,
                            const DatasetSchema& schema) {
    const std::string surv_what = "survival table";
    const std::string long_what = "longitudinal table";

    std::vector<std::string> known = {schema.id_column, schema.time_column, schema.event_column};
    known.insert(known.end(), schema.baseline_columns.begin(), schema.baseline_columns.end());
    detail::check_columns_classified(survival_table, surv_what, known);

    Dataset data;
    data.covariate_names = schema.covariate_columns;
    data.regressor_names = schema.regressor_columns;
    detail::classify_baseline(survival_table, schema.baseline_columns, surv_what, data.baseline);

    int id_col = survival_table.require_column(schema.id_column, surv_what);
    int time_col = survival_table.require_column(schema.time_column, surv_what);
    int event_col = survival_table.require_column(schema.event_column, surv_what);
    std::vector<int> base_cols;
    for (const auto& name : schema.baseline_columns)
        base_cols.push_back(survival_table.require_column(name, surv_what));

    std::unordered_set<std::string> seen_ids;
    data.survival.reserve(survival_table.rows.size());
    for (std::size_t r = 0; r < survival_table.rows.size(); ++r) {
        const auto& row = survival_table.rows[r];
        SurvivalRecord rec;
        rec.id = row[static_cast<std::size_t>(id_col)];
        if (rec.id.empty())
            throw data_error(surv_what + ": row " + std::to_string(r + 1) + " has an empty id");
        if (!seen_ids.insert(rec.id).second)
            throw data_error(surv_what + ": duplicate subject id '" + rec.id + "'");
        rec.time = detail::parse_required_double(
            row[static_cast<std::size_t>(time_col)], surv_what + " column '" + schema.time_column + "'", r + 1);
        if (rec.time < 0.0)
            throw data_error(surv_what + ": row " + std::to_string(r + 1) + " has negative " +
                             schema.time_column);
        double ev = detail::parse_required_double(
            row[static_cast<std::size_t>(event_col)], surv_what + " column '" + schema.event_column + "'", r + 1);
        if (ev != 0.0 && ev != 1.0)
            throw data_error(surv_what + ": row " + std::to_string(r + 1) + " has " +
                             schema.event_column + "=" + format_double(ev) + ", expected 0 or 1");
        rec.event = static_cast<int>(ev);
        rec.baseline.reserve(base_cols.size());
        for (std::size_t j = 0; j < base_cols.size(); ++j) {
            const std::string& field = row[static_cast<std::size_t>(base_cols[j])];
            if (data.baseline.is_categorical[j])
                rec.baseline.push_back(detail::baseline_level_code(data.baseline, j, field, rec.id));
            else
                rec.baseline.push_back(detail::parse_required_double(
                    field, surv_what + " column '" + schema.baseline_columns[j] + "'", r + 1));
        }
        data.survival.push_back(std::move(rec));
    }
    if (data.survival.empty()) throw data_error(surv_what + " has no rows");

    data.longitudinal = detail::parse_longitudinal(longitudinal_table, schema, long_what);
    for (const auto& rec : data.longitudinal)
        if (seen_ids.find(rec.id) == seen_ids.end())
            throw data_error(long_what + ": subject id '" + rec.id + "' has no survival row");
    return data;
}

inline Dataset load_dataset_files(const std::string& survival_path,
                                  const std::string& longitudinal_path,
                                  const DatasetSchema& schema) {
    return load_dataset(read_csv_file(survival_path), read_csv_file(longitudinal_path), schema);
}

inline std::string format_covariate_value(double v) {
    return std::isnan(v) ? std::string() : format_double(v);
}

inline CsvTable survival_to_csv(const Dataset& data, const DatasetSchema& schema) {
    CsvTable table;
    table.header = {schema.id_column, schema.time_column, schema.event_column};
    table.header.insert(table.header.end(), data.baseline.names.begin(), data.baseline.names.end());
    for (const auto& rec : data.survival) {
        std::vector<std::string> row = {rec.id, format_double(rec.time), std::to_string(rec.event)};
        for (std::size_t j = 0; j < rec.baseline.size(); ++j) {
            if (data.baseline.is_categorical[j])
                row.push_back(data.baseline.levels[j][static_cast<std::size_t>(rec.baseline[j])]);
            else
                row.push_back(format_double(rec.baseline[j]));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline CsvTable longitudinal_to_csv(const Dataset& data, const DatasetSchema& schema) {
    CsvTable table;
    table.header = {schema.id_column, schema.fuptime_column};
    table.header.insert(table.header.end(), data.covariate_names.begin(), data.covariate_names.end());
    table.header.insert(table.header.end(), data.regressor_names.begin(), data.regressor_names.end());
    for (const auto& rec : data.longitudinal) {
        std::vector<std::string> row = {rec.id, format_double(rec.fuptime)};
        for (double v : rec.covariates) row.push_back(format_covariate_value(v));
        for (double v : rec.regressors) row.push_back(format_double(v));
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline void save_dataset_files(const Dataset& data, const DatasetSchema& schema,
                               const std::string& survival_path,
                               const std::string& longitudinal_path) {
    write_csv_file(survival_path, survival_to_csv(data, schema));
    write_csv_file(longitudinal_path, longitudinal_to_csv(data, schema));
}

/// Deep equality with NaN == NaN for missing covariate values.
inline bool equivalent(const Dataset& a, const Dataset& b) {
    auto double_eq = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    if (a.survival.size() != b.survival.size()) return false;
    if (a.longitudinal.size() != b.longitudinal.size()) return false;
    if (a.baseline.names != b.baseline.names) return false;
    if (a.baseline.is_categorical != b.baseline.is_categorical) return false;
    if (a.baseline.levels != b.baseline.levels) return false;
    if (a.covariate_names != b.covariate_names) return false;
    if (a.regressor_names != b.regressor_names) return false;
    if (a.landmark.has_value() != b.landmark.has_value()) return false;
    if (a.landmark.has_value() && *a.landmark != *b.landmark) return false;
    for (std::size_t i = 0; i < a.survival.size(); ++i) {
        const auto& x = a.survival[i];
        const auto& y = b.survival[i];
        if (x.id != y.id || x.time != y.time || x.event != y.event) return false;
        if (x.baseline.size() != y.baseline.size()) return false;
        for (std::size_t j = 0; j < x.baseline.size(); ++j)
            if (!double_eq(x.baseline[j], y.baseline[j])) return false;
    }
    for (std::size_t i = 0; i < a.longitudinal.size(); ++i) {
        const auto& x = a.longitudinal[i];
        const auto& y = b.longitudinal[i];
        if (x.id != y.id || x.fuptime != y.fuptime) return false;
        if (x.covariates.size() != y.covariates.size()) return false;
        if (x.regressors.size() != y.regressors.size()) return false;
        for (std::size_t j = 0; j < x.covariates.size(); ++j)
            if (!double_eq(x.covariates[j], y.covariates[j])) return false;
        for (std::size_t j = 0; j < x.regressors.size(); ++j)
            if (!double_eq(x.regressors[j], y.regressors[j])) return false;
    }
    return true;
}

/// Replaces the named longitudinal covariates with their natural log and
/// renames them "log" + capitalized original name ("serBilir" -> "logSerBilir").
inline Dataset log_transform(const Dataset& data, const std::vector<std::string>& names) {
    Dataset out = data;
    for (const auto& name : names) {
        int j = out.covariate_index(name);
        if (j < 0) throw config_error("log transform: unknown longitudinal covariate '" + name + "'");
        for (std::size_t r = 0; r < out.longitudinal.size(); ++r) {
            double& v = out.longitudinal[r].covariates[static_cast<std::size_t>(j)];
            if (std::isnan(v)) continue;
            if (v <= 0.0)
                throw data_error("log transform: covariate '" + name + "' has non-positive value " +
                                 format_double(v) + " at longitudinal row " + std::to_string(r + 1) +
                                 " (subject id=" + out.longitudinal[r].id + ")");
            v = std::log(v);
        }
        std::string renamed = name;
        renamed[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(renamed[0])));
        out.covariate_names[static_cast<std::size_t>(j)] = "log" + renamed;
    }
    return out;
}

/// Landmarking at time t_L: keeps subjects still at risk after t_L (strictly
/// time > t_L) and their measurements taken up to and including t_L. Subjects
/// left without any longitudinal row are dropped with a warning. Reapplying
/// the same landmark is a no-op; a different landmark is an error.
inline Dataset apply_landmark(const Dataset& data, double t_landmark, WarningSink warnings = nullptr) {
    if (data.landmark.has_value() && *data.landmark != t_landmark)
        throw data_error("dataset is already landmarked at " + format_double(*data.landmark) +
                         "; cannot re-landmark at " + format_double(t_landmark));
    Dataset out;
    out.baseline = data.baseline;
    out.covariate_names = data.covariate_names;
    out.regressor_names = data.regressor_names;
    out.landmark = t_landmark;

    std::unordered_set<std::string> retained;
    for (const auto& rec : data.survival)
        if (rec.time > t_landmark) retained.insert(rec.id);
    if (retained.empty())
        throw data_error("landmark time " + format_double(t_landmark) +
                         " is not exceeded by any survival time; no subjects remain");

    std::unordered_set<std::string> has_rows;
    for (const auto& rec : data.longitudinal)
        if (rec.fuptime <= t_landmark && retained.count(rec.id)) has_rows.insert(rec.id);

    std::vector<std::string> dropped;
    for (const auto& rec : data.survival) {
        if (!retained.count(rec.id)) continue;
        if (!has_rows.count(rec.id)) {
            dropped.push_back(rec.id);
            continue;
        }
        out.survival.push_back(rec);
    }
    if (out.survival.empty())
        throw data_error("no subjects remain after landmarking at " + format_double(t_landmark) +
                         " (none has a measurement at or before the landmark)");
    if (!dropped.empty()) {
        std::string joined;
        for (const auto& id : dropped) joined += (joined.empty() ? "" : ", ") + id;
        warn(warnings, "landmark " + format_double(t_landmark) + " dropped " +
                           std::to_string(dropped.size()) +
                           " subject(s) with no measurement at or before the landmark: " + joined);
    }
    for (const auto& rec : data.longitudinal)
        if (rec.fuptime <= t_landmark && has_rows.count(rec.id)) out.longitudinal.push_back(rec);
    return out;
}

/// Kaplan-Meier estimate of S(t) from right-censored (time, event) pairs.
inline StepFunction kaplan_meier(const std::vector<double>& times, const std::vector<int>& events) {
    if (times.empty()) throw data_error("Kaplan-Meier: no observations");
    if (times.size() != events.size())
        throw data_error("Kaplan-Meier: times and events differ in length");
    std::vector<std::size_t> order(times.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (times[i] < 0.0) throw data_error("Kaplan-Meier: negative time");
        if (events[i] != 0 && events[i] != 1) throw data_error("Kaplan-Meier: event must be 0 or 1");
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    StepFunction km;
    km.value_before = 1.0;
    double surv = 1.0;
    std::size_t i = 0;
    std::size_t n = order.size();
    while (i < n) {
        double u = times[order[i]];
        std::size_t at_risk = n - i;
        std::size_t deaths = 0;
        std::size_t j = i;
        while (j < n && times[order[j]] == u) {
            deaths += static_cast<std::size_t>(events[order[j]]);
            ++j;
        }
        if (deaths > 0) {
            surv *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
            km.knots.push_back(u);
            km.values.push_back(surv);
        }
        i = j;
    }
    return km;
}

/// New subjects for prediction: baseline rows without survival outcome plus
/// their longitudinal history. Levels of categorical baseline columns are
/// resolved against the training data's level sets.
struct NewSubjects {
    std::vector<SurvivalRecord> baseline_rows;  // time/event unused
    std::vector<LongitudinalRecord> longitudinal;
};

inline NewSubjects load_new_subjects(const CsvTable& baseline_table,
                                     const CsvTable& longitudinal_table,
                                     const DatasetSchema& schema, const BaselineInfo& training) {
    const std::string base_what = "new-subject baseline table";
    std::vector<std::string> known = {schema.id_column};
    known.insert(known.end(), schema.baseline_columns.begin(), schema.baseline_columns.end());
    detail::check_columns_classified(baseline_table, base_what, known);
    if (training.names != schema.baseline_columns)
        throw config_error("new-subject schema baseline columns do not match the trained model");

    int id_col = baseline_table.require_column(schema.id_column, base_what);
    std::vector<int> base_cols;
    for (const auto& name : schema.baseline_columns)
        base_cols.push_back(baseline_table.require_column(name, base_what));

    NewSubjects out;
    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 0; r < baseline_table.rows.size(); ++r) {
        const auto& row = baseline_table.rows[r];
        SurvivalRecord rec;
        rec.id = row[static_cast<std::size_t>(id_col)];
        if (rec.id.empty())
            throw data_error(base_what + ": row " + std::to_string(r + 1) + " has an empty id");
        if (!seen_ids.insert(rec.id).second)
            throw data_error(base_what + ": duplicate subject id '" + rec.id + "'");
        rec.time = std::numeric_limits<double>::quiet_NaN();
        rec.event = 0;
        for (std::size_t j = 0; j < base_cols.size(); ++j) {
            const std::string& field = row[static_cast<std::size_t>(base_cols[j])];
            if (training.is_categorical[j])
                rec.baseline.push_back(detail::baseline_level_code(training, j, field, rec.id));
            else
                rec.baseline.push_back(detail::parse_required_double(
                    field, base_what + " column '" + schema.baseline_columns[j] + "'", r + 1));
        }
        out.baseline_rows.push_back(std::move(rec));
    }
    if (out.baseline_rows.empty()) throw data_error(base_what + " has no rows");

    out.longitudinal = detail::parse_longitudinal(longitudinal_table, schema,
                                                  "new-subject longitudinal table");
    for (const auto& rec : out.longitudinal)
        if (seen_ids.find(rec.id) == seen_ids.end())
            throw data_error("new-subject longitudinal table: subject id '" + rec.id +
                             "' has no baseline row");
    return out;
}

}  // namespace prc
