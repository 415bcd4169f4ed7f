#pragma once

#include "tbent/detection.hpp"

#include <json.hpp>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tbent::detection {

inline constexpr const char* kCountsSchema = "tbent.counts/1";

/// One row per setting and delay bin:
/// setting,pair,delay,pulses,duration_s,singles_s,singles_i,twofold,fourfold
/// fourfold is filled on the zero-delay row of pair 0 only.
void write_counts_csv(std::ostream& out, std::span<const CountsRecord> records);
std::vector<CountsRecord> read_counts_csv(std::istream& in);

nlohmann::json counts_to_json(const CountsRecord& record);
CountsRecord counts_from_json(const nlohmann::json& j);

}  // namespace tbent::detection
