#pragma once

// Daily market records: ingestion from the CSV contract, response
// construction, date-range slicing and conversion to a MixedDataset.

#include <array>
#include <chrono>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mixpred/mixmodel.hpp"

namespace mixpred {

using Date = std::chrono::year_month_day;

inline constexpr int kIntradayPoints = 49;
inline constexpr std::array<std::string_view, 5> kEmotions{"anger", "disgust", "joy", "sadness", "fear"};

struct MarketRecord {
  Date date;
  double volume = 0;
  std::array<double, 5> emotions{};  // closed shares
  Eigen::VectorXd intraday;          // 49 five-minute returns
  double open_return = 0;            // next day's open return, pre-aligned upstream
};

/// Parses YYYY-MM-DD. Throws ParseError.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

/// Exact column list of the input file.
std::vector<std::string> market_columns();

/// Reads and validates a market CSV; records come back sorted by date.
/// `source` names the input in error messages.
std::vector<MarketRecord> ingest(std::istream& in, const std::string& source = "input");
std::vector<MarketRecord> ingest(const std::string& path);

void write_market_csv(const std::vector<MarketRecord>& records, std::ostream& out);

/// 1 where the open return is strictly positive.
Eigen::VectorXd make_response(const std::vector<MarketRecord>& records);

/// Inclusive calendar range.
struct DateRange {
  Date from;
  Date to;
  bool contains(const Date& d) const noexcept { return from <= d && d <= to; }
};

/// Named presets "1", "2", "3" (also "phase1".."phase3") or "FROM:TO" with
/// ISO dates. Throws InvalidArgument.
DateRange parse_phase(std::string_view spec);
DateRange phase_preset(int phase);

std::vector<MarketRecord> slice(const std::vector<MarketRecord>& records, const DateRange& range);

/// Keeps records with |open_return| > tau; tau = 0 keeps everything.
/// Throws EmptySubsample when fewer than 20 records survive.
std::vector<MarketRecord> threshold_subsample(const std::vector<MarketRecord>& records, double tau);
std::size_t count_above(const std::vector<MarketRecord>& records, double tau);

inline constexpr std::size_t kMinSubsample = 20;

/// Volume as the scalar, emotion shares as the composition, intraday returns
/// on an equally spaced grid over [0, 1], and the binary response.
MixedDataset to_dataset(const std::vector<MarketRecord>& records);

}  // namespace mixpred
