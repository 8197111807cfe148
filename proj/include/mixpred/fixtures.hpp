#pragma once

// Synthetic market files in the ingest schema, drawn from a known mixed model.
//
//   signal  the open-return sign follows a logistic model in all three blocks
//   noise   the open return is independent of the predictors
//   graded  large moves follow the model, small moves are close to coin flips

#include <cstdint>
#include <string_view>
#include <vector>

#include "mixpred/market.hpp"

namespace mixpred {

enum class FixtureKind { Signal, Noise, Graded };

FixtureKind parse_fixture_kind(std::string_view name);

struct FixtureOptions {
  FixtureKind kind = FixtureKind::Signal;
  std::size_t n = 300;
  std::uint64_t seed = 1;
  Date start{std::chrono::year{2014}, std::chrono::month{12}, std::chrono::day{2}};
};

/// One record per calendar day from `start`, with raw emotion counts closed
/// on the way in.
std::vector<MarketRecord> make_fixture(const FixtureOptions& options);

}  // namespace mixpred
