#pragma once

#include <vector>

#include "gridnet/field.hpp"

namespace gridnet {

// All transforms operate cell by cell, in place, and append a line to the
// field's preprocessing log.

// Subtract the per-phase mean: sample t belongs to phase t % period.
// period must be >= 2 and the series must cover at least two full periods.
void deseasonalize(Field& f, int period);

// Theil-Sen slope of one series against t = 0..T-1: median over all C(T,2)
// pairwise slopes. Exposed for the oracle tests.
double theil_sen_slope(std::span<const double> y);

// Remove the Theil-Sen trend line (slope through the median intercept) from
// every cell.
void theil_sen_detrend(Field& f);
void theil_sen_detrend_serial(Field& f);

// Subtract the temporal mean of every cell.
void center(Field& f);

}  // namespace gridnet
