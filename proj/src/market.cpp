#include "mixpred/market.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace mixpred {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool to_double(std::string_view s, double& v) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  int y = 0;
  unsigned m = 0, d = 0;
  auto part = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc() && ptr == text.data() + pos + len;
  };
  const bool shape = text.size() == 10 && text[4] == '-' && text[7] == '-';
  if (!shape || !part(0, 4, y) || !part(5, 2, m) || !part(8, 2, d)) {
    throw ParseError("'" + std::string(text) + "' is not a YYYY-MM-DD date");
  }
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw ParseError("'" + std::string(text) + "' is not a valid calendar date");
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::vector<std::string> market_columns() {
  std::vector<std::string> cols{"date", "volume"};
  for (auto e : kEmotions) cols.emplace_back(e);
  for (int k = 1; k <= kIntradayPoints; ++k) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "r%02d", k);
    cols.emplace_back(buf);
  }
  cols.emplace_back("open_return");
  return cols;
}

std::vector<MarketRecord> ingest(std::istream& in, const std::string& source) {
  const auto columns = market_columns();
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(source + ": file is empty (no header)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header;
  for (auto f : split(line)) header.emplace_back(trim(f));
  std::vector<std::string> missing;
  for (const auto& c : columns) {
    if (std::find(header.begin(), header.end(), c) == header.end()) missing.push_back(c);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw SchemaError(source + ": missing columns: " + list);
  }
  if (header != columns) {
    throw SchemaError(source + ": columns must appear exactly as date,volume,anger,disgust,joy,sadness,fear,"
                               "r01..r49,open_return (unexpected or reordered columns)");
  }

  std::vector<MarketRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    const std::string where = source + " row " + std::to_string(row);
    if (fields.size() != columns.size()) {
      throw ParseError(where + ": expected " + std::to_string(columns.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    auto number = [&](std::size_t col) {
      double v = 0;
      if (!to_double(fields[col], v)) {
        throw ParseError(where + ", column " + columns[col] + ": cannot parse '" + std::string(fields[col]) +
                         "' as a number");
      }
      if (!std::isfinite(v)) throw ParseError(where + ", column " + columns[col] + ": value is not finite");
      return v;
    };

    MarketRecord r;
    try {
      r.date = parse_date(fields[0]);
    } catch (const ParseError& e) {
      throw ParseError(where + ", column date: " + e.what());
    }
    r.volume = number(1);
    if (!(r.volume > 0)) throw ParseError(where + ", column volume: volume must be positive");
    double total = 0;
    for (std::size_t e = 0; e < 5; ++e) {
      const double v = number(2 + e);
      if (v < 0) throw ParseError(where + ", column " + columns[2 + e] + ": emotion values must be nonnegative");
      if (v == 0) {
        throw ZeroPart(where + ": emotion '" + columns[2 + e] + "' is zero; compositions need positive parts");
      }
      r.emotions[e] = v;
      total += v;
    }
    for (double& v : r.emotions) v /= total;
    r.intraday.resize(kIntradayPoints);
    for (int k = 0; k < kIntradayPoints; ++k) r.intraday(k) = number(7 + static_cast<std::size_t>(k));
    r.open_return = number(columns.size() - 1);
    records.push_back(std::move(r));
  }

  std::stable_sort(records.begin(), records.end(),
                   [](const MarketRecord& a, const MarketRecord& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].date == records[i - 1].date) {
      throw ParseError(source + ": duplicate date " + format_date(records[i].date));
    }
  }
  return records;
}

std::vector<MarketRecord> ingest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return ingest(in, path);
}

void write_market_csv(const std::vector<MarketRecord>& records, std::ostream& out) {
  const auto columns = market_columns();
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& r : records) {
    out << format_date(r.date) << ',' << num(r.volume);
    for (double e : r.emotions) out << ',' << num(e);
    for (Eigen::Index k = 0; k < r.intraday.size(); ++k) out << ',' << num(r.intraday(k));
    out << ',' << num(r.open_return) << '\n';
  }
}

Eigen::VectorXd make_response(const std::vector<MarketRecord>& records) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) y(static_cast<Eigen::Index>(i)) = records[i].open_return > 0 ? 1 : 0;
  return y;
}

DateRange phase_preset(int phase) {
  using namespace std::chrono;
  switch (phase) {
    case 1: return {year{2014} / December / 2, year{2015} / June / 18};
    case 2: return {year{2015} / June / 19, year{2015} / October / 14};
    case 3: return {year{2015} / October / 15, year{2016} / April / 29};
    default: throw InvalidArgument("phase must be 1, 2 or 3");
  }
}

DateRange parse_phase(std::string_view spec) {
  spec = trim(spec);
  if (spec.size() == 1 && spec[0] >= '1' && spec[0] <= '3') return phase_preset(spec[0] - '0');
  if (spec.size() == 6 && spec.substr(0, 5) == "phase" && spec[5] >= '1' && spec[5] <= '3') {
    return phase_preset(spec[5] - '0');
  }
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("phase '" + std::string(spec) + "' is neither a preset (1-3) nor FROM:TO");
  }
  const DateRange r{parse_date(spec.substr(0, colon)), parse_date(spec.substr(colon + 1))};
  if (r.to < r.from) throw InvalidArgument("phase range ends before it starts");
  return r;
}

std::vector<MarketRecord> slice(const std::vector<MarketRecord>& records, const DateRange& range) {
  std::vector<MarketRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const MarketRecord& r) { return range.contains(r.date); });
  return out;
}

std::size_t count_above(const std::vector<MarketRecord>& records, double tau) {
  if (tau == 0) return records.size();
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                [&](const MarketRecord& r) { return std::abs(r.open_return) > tau; }));
}

std::vector<MarketRecord> threshold_subsample(const std::vector<MarketRecord>& records, double tau) {
  if (!(tau >= 0 && tau <= 0.1)) throw InvalidArgument("tau must lie in [0, 0.1]");
  std::vector<MarketRecord> out;
  if (tau == 0) {
    out = records;
  } else {
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [&](const MarketRecord& r) { return std::abs(r.open_return) > tau; });
  }
  if (out.size() < kMinSubsample) {
    throw EmptySubsample("tau = " + num(tau) + " keeps " + std::to_string(out.size()) + " records; at least " +
                         std::to_string(kMinSubsample) + " are needed");
  }
  return out;
}

MixedDataset to_dataset(const std::vector<MarketRecord>& records) {
  const auto n = static_cast<Eigen::Index>(records.size());
  MixedDataset d;
  d.scalar.resize(n);
  d.compositions.resize(n, 5);
  Eigen::MatrixXd x(n, kIntradayPoints);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    if (r.intraday.size() != kIntradayPoints) {
      throw DimensionMismatch("record " + format_date(r.date) + " has " + std::to_string(r.intraday.size()) +
                              " intraday values");
    }
    d.scalar(i) = r.volume;
    for (Eigen::Index e = 0; e < 5; ++e) d.compositions(i, e) = r.emotions[static_cast<std::size_t>(e)];
    x.row(i) = r.intraday.transpose();
  }
  d.curves = CurveSet(Grid::linspace(0.0, 1.0, kIntradayPoints), std::move(x));
  d.response = make_response(records);
  return d;
}

}  // namespace mixpred
