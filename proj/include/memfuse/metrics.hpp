#pragma once

#include <span>

namespace memfuse {

// 1 - SS_res / SS_tot. Throws InputError on length mismatch, fewer than two
// values or zero target variance.
double r2_score(std::span<const double> y_true, std::span<const double> y_pred);

// Sample correlation. Throws InputError on length mismatch, fewer than three
// values or a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);
double population_variance(std::span<const double> x);

}  // namespace memfuse
