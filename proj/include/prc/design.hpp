#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "prc/data_model.hpp"
#include "prc/errors.hpp"
#include "prc/lmm.hpp"

namespace prc {

/// Per-column centering/scaling applied to a design matrix. Constant columns
/// are left alone (standardized = 0) so the transform stays invertible.
struct ColumnScaling {
    Eigen::VectorXd mean, sd;
    std::vector<std::uint8_t> standardized;

    Eigen::VectorXd apply(const Eigen::VectorXd& raw_row) const {
        Eigen::VectorXd out = raw_row;
        for (Eigen::Index j = 0; j < out.size(); ++j)
            if (standardized[static_cast<std::size_t>(j)]) out[j] = (out[j] - mean[j]) / sd[j];
        return out;
    }
};

struct DesignMatrix {
    std::vector<std::string> subject_ids;
    std::vector<std::string> column_names;
    Eigen::MatrixXd values;  // standardized when scaling.standardized[j] is set
    ColumnScaling scaling;
    std::size_t n_baseline_cols = 0;
};

namespace detail {

// Dummy-coded width and names for the requested baseline columns; the first
// level of a categorical column is the reference and gets no column.
inline std::vector<std::string> baseline_design_names(const BaselineInfo& info,
                                                      const std::vector<std::string>& requested,
                                                      std::vector<int>* col_of_name = nullptr) {
    std::vector<std::string> names;
    for (const auto& name : requested) {
        int j = info.index(name);
        if (j < 0) throw config_error("unknown baseline covariate '" + name + "'");
        if (col_of_name != nullptr) col_of_name->push_back(j);
        if (info.is_categorical[static_cast<std::size_t>(j)]) {
            const auto& levels = info.levels[static_cast<std::size_t>(j)];
            for (std::size_t l = 1; l < levels.size(); ++l) names.push_back(name + levels[l]);
        } else {
            names.push_back(name);
        }
    }
    return names;
}

inline Eigen::VectorXd baseline_row_values(const BaselineInfo& info, const std::vector<int>& cols,
                                           const SurvivalRecord& rec, std::size_t width) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(width));
    Eigen::Index k = 0;
    for (int j : cols) {
        if (info.is_categorical[static_cast<std::size_t>(j)]) {
            const auto& levels = info.levels[static_cast<std::size_t>(j)];
            auto code = static_cast<std::size_t>(rec.baseline[static_cast<std::size_t>(j)]);
            for (std::size_t l = 1; l < levels.size(); ++l) out[k++] = (code == l) ? 1.0 : 0.0;
        } else {
            out[k++] = rec.baseline[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

inline void standardize_in_place(DesignMatrix& design, bool standardize, WarningSink warnings) {
    const auto n = design.values.rows();
    const auto d = design.values.cols();
    design.scaling.mean = Eigen::VectorXd::Zero(d);
    design.scaling.sd = Eigen::VectorXd::Ones(d);
    design.scaling.standardized.assign(static_cast<std::size_t>(d), 0);
    if (!standardize || n == 0) return;
    for (Eigen::Index j = 0; j < d; ++j) {
        double mean = design.values.col(j).mean();
        double var = (design.values.col(j).array() - mean).square().sum() / static_cast<double>(n);
        double sd = std::sqrt(var);
        if (sd <= 1e-12 * (1.0 + std::fabs(mean))) {
            warn(warnings, "design column '" + design.column_names[static_cast<std::size_t>(j)] +
                               "' is constant; left unstandardized");
            continue;
        }
        design.scaling.mean[j] = mean;
        design.scaling.sd[j] = sd;
        design.scaling.standardized[static_cast<std::size_t>(j)] = 1;
        design.values.col(j) = (design.values.col(j).array() - mean) / sd;
    }
}

}  // namespace detail

/// Cox design matrix: dummy-coded baseline covariates followed by the
/// predicted random effects, one row per subject, optionally standardized
/// (columns centered and divided by the population SD).
inline DesignMatrix assemble_design(const RandomEffectSummary& ranefs, const Dataset& data,
                                    const std::vector<std::string>& baseline_covariates,
                                    bool standardize = true, WarningSink warnings = nullptr) {
    if (ranefs.subject_ids.size() != data.survival.size())
        throw data_error("random-effect summary and survival data disagree on subject count");
    for (std::size_t i = 0; i < data.survival.size(); ++i)
        if (ranefs.subject_ids[i] != data.survival[i].id)
            throw data_error("random-effect summary is not aligned with the survival rows (id '" +
                             ranefs.subject_ids[i] + "' vs '" + data.survival[i].id + "')");

    DesignMatrix design;
    design.subject_ids = ranefs.subject_ids;
    std::vector<int> base_cols;
    design.column_names = detail::baseline_design_names(data.baseline, baseline_covariates, &base_cols);
    design.n_baseline_cols = design.column_names.size();
    design.column_names.insert(design.column_names.end(), ranefs.column_names.begin(),
                               ranefs.column_names.end());

    const auto n = static_cast<Eigen::Index>(data.survival.size());
    const auto d = static_cast<Eigen::Index>(design.column_names.size());
    if (d == 0) throw data_error("empty design: no baseline covariates and no random effects");
    design.values.resize(n, d);
    const auto nb = static_cast<Eigen::Index>(design.n_baseline_cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        design.values.row(i).head(nb) =
            detail::baseline_row_values(data.baseline, base_cols,
                                        data.survival[static_cast<std::size_t>(i)],
                                        design.n_baseline_cols)
                .transpose();
        design.values.row(i).tail(ranefs.values.cols()) = ranefs.values.row(i);
    }
    detail::standardize_in_place(design, standardize, warnings);
    return design;
}

/// Raw (unstandardized) design row for one new subject, given its predicted
/// random effects; apply `scaling.apply` before multiplying with scaled
/// coefficients.
inline Eigen::VectorXd raw_design_row(const BaselineInfo& info,
                                      const std::vector<std::string>& baseline_covariates,
                                      const SurvivalRecord& rec, const Eigen::VectorXd& ranefs) {
    std::vector<int> base_cols;
    auto names = detail::baseline_design_names(info, baseline_covariates, &base_cols);
    Eigen::VectorXd row(static_cast<Eigen::Index>(names.size()) + ranefs.size());
    row.head(static_cast<Eigen::Index>(names.size())) =
        detail::baseline_row_values(info, base_cols, rec, names.size());
    row.tail(ranefs.size()) = ranefs;
    return row;
}

enum class ValueMode { baseline_value, locf };

/// Comparator designs that ignore the mixed models: each longitudinal
/// covariate contributes a single value per subject, either its measurement
/// at fuptime 0 or the last one carried forward. A covariate missing such a
/// value for any subject is dropped for the run, with a warning.
inline DesignMatrix build_value_design(const Dataset& data,
                                       const std::vector<std::string>& baseline_covariates,
                                       ValueMode mode, bool standardize = true,
                                       WarningSink warnings = nullptr) {
    auto rows = rows_by_subject(data);
    const std::size_t n = data.survival.size();
    const std::size_t p = data.covariate_names.size();

    std::vector<std::vector<double>> value(p, std::vector<double>(n));
    std::vector<std::uint8_t> keep(p, 1);
    std::vector<std::string> drop_reason(p);
    for (std::size_t s = 0; s < p; ++s) {
        for (std::size_t i = 0; i < n && keep[s]; ++i) {
            double chosen = std::numeric_limits<double>::quiet_NaN();
            double chosen_time = -1.0;
            for (std::size_t r : rows[i]) {
                const auto& rec = data.longitudinal[r];
                double v = rec.covariates[s];
                if (std::isnan(v)) continue;
                if (mode == ValueMode::baseline_value) {
                    if (rec.fuptime == 0.0 && std::isnan(chosen)) chosen = v;
                } else if (rec.fuptime >= chosen_time) {
                    chosen_time = rec.fuptime;
                    chosen = v;
                }
            }
            if (std::isnan(chosen)) {
                keep[s] = 0;
                drop_reason[s] = "subject id=" + data.survival[i].id +
                                 (mode == ValueMode::baseline_value
                                      ? " has no measurement at fuptime 0"
                                      : " has no non-missing measurement");
            } else {
                value[s][i] = chosen;
            }
        }
    }

    DesignMatrix design;
    for (const auto& rec : data.survival) design.subject_ids.push_back(rec.id);
    std::vector<int> base_cols;
    design.column_names = detail::baseline_design_names(data.baseline, baseline_covariates, &base_cols);
    design.n_baseline_cols = design.column_names.size();
    std::vector<std::size_t> kept;
    for (std::size_t s = 0; s < p; ++s) {
        if (keep[s]) {
            design.column_names.push_back(data.covariate_names[s]);
            kept.push_back(s);
        } else {
            warn(warnings, "covariate '" + data.covariate_names[s] + "' dropped from the " +
                               (mode == ValueMode::baseline_value ? "baseline-value" : "LOCF") +
                               " design: " + drop_reason[s]);
        }
    }
    const auto d = static_cast<Eigen::Index>(design.column_names.size());
    if (d == 0) throw data_error("empty design: every covariate was dropped and no baseline columns");
    design.values.resize(static_cast<Eigen::Index>(n), d);
    const auto nb = static_cast<Eigen::Index>(design.n_baseline_cols);
    for (std::size_t i = 0; i < n; ++i) {
        design.values.row(static_cast<Eigen::Index>(i)).head(nb) =
            detail::baseline_row_values(data.baseline, base_cols, data.survival[i],
                                        design.n_baseline_cols)
                .transpose();
        for (std::size_t k = 0; k < kept.size(); ++k)
            design.values(static_cast<Eigen::Index>(i),
                          static_cast<Eigen::Index>(design.n_baseline_cols + k)) = value[kept[k]][i];
    }
    detail::standardize_in_place(design, standardize, warnings);
    return design;
}

}  // namespace prc
