#pragma once

#include <span>
#include <vector>

#include "dbcl/core_model.hpp"

namespace dbcl {

/// |X_k|^2 / N^2 for every DFT bin k = 0..N-1 of a rectangular window, so the
/// bins sum to the window's energy divided by N.
std::vector<double> power_spectrum(std::span<const double> window);

/// Samples per window; throws unless window_seconds * sample_rate_hz is an
/// integer of at least 2.
int window_length(double sample_rate_hz, double window_seconds);

/// DFT bin closest to target_hz for the given window length.
int nearest_bin(double sample_rate_hz, int window_len, double target_hz);

/// One power value per non-overlapping window per variable at the bin nearest
/// target_hz. Output sampling_interval is window_seconds.
TimeSeriesDataset band_power_series(const TimeSeriesDataset& data, double sample_rate_hz, double window_seconds,
                                    double target_hz);

}  // namespace dbcl
