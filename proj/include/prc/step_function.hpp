#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "prc/errors.hpp"

namespace prc {

/// Right-continuous step function: value_before on (-inf, knots[0]) and
/// values[i] on [knots[i], knots[i+1]). Used for survival curves and
/// cumulative hazards.
struct StepFunction {
    std::vector<double> knots;   // strictly increasing
    std::vector<double> values;  // same length as knots
    double value_before = 1.0;

    void validate(const std::string& what = "step function") const {
        if (knots.size() != values.size())
            throw data_error(what + ": knots and values differ in length");
        for (std::size_t i = 1; i < knots.size(); ++i)
            if (!(knots[i - 1] < knots[i]))
                throw data_error(what + ": knots are not strictly increasing");
    }

    /// f(t), right-continuous: includes a jump exactly at t.
    double operator()(double t) const {
        auto it = std::upper_bound(knots.begin(), knots.end(), t);
        if (it == knots.begin()) return value_before;
        return values[static_cast<std::size_t>(it - knots.begin()) - 1];
    }

    /// f(t-): the value just before t, excluding a jump at t itself.
    double left_limit(double t) const {
        auto it = std::lower_bound(knots.begin(), knots.end(), t);
        if (it == knots.begin()) return value_before;
        return values[static_cast<std::size_t>(it - knots.begin()) - 1];
    }
};

}  // namespace prc
