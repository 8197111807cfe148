#pragma once

// Plain-text and CSV views of a fitted model on market data.

#include <iosfwd>
#include <string>
#include <vector>

#include "mixpred/mixmodel.hpp"

namespace mixpred {

/// 09:35 ... 11:30 then 13:00 ... 15:00 in five-minute steps (49 labels).
std::vector<std::string> intraday_time_labels();

/// Emotion composition to two decimals next to the volume coefficient.
void write_coefficient_table(const MixedFit& model, std::ostream& out);

/// `time,beta` with one row per intraday point. The model's grid must have
/// 49 points (DimensionMismatch otherwise).
void write_beta_csv(const MixedFit& model, std::ostream& out);

/// Writes coefficients.txt and beta.csv into `dir`, creating it if needed.
void write_report(const MixedFit& model, const std::string& dir);

}  // namespace mixpred
