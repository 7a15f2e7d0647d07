#pragma once

#include <span>
#include <vector>

namespace wbea {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_std_error = 0.0;
    int points = 0;
};

// Ordinary least squares y = a + b x with the textbook slope error.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Slope of log y against log x; every y must be positive.
LinearFit loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace wbea
