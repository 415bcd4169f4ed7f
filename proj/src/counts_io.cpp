#include "tbent/counts_io.hpp"

#include "tbent/errors.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace tbent::detection {

namespace {

constexpr const char* kHeader = "setting,pair,delay,pulses,duration_s,singles_s,singles_i,twofold,fourfold";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::uint64_t parse_count(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size() || v < 0) throw ConfigError("bad count '" + s + "'");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

void write_counts_csv(std::ostream& out, std::span<const CountsRecord> records) {
  out << kHeader << '\n';
  out.precision(17);
  for (const auto& r : records) {
    if (r.setting_id.find(',') != std::string::npos) {
      throw ConfigError("setting id may not contain commas");
    }
    for (int j = 0; j < 2; ++j) {
      for (int n = -kMaxDelayBin; n <= kMaxDelayBin; ++n) {
        out << r.setting_id << ',' << j << ',' << n << ',' << r.pulses << ',' << r.duration << ','
            << r.singles[static_cast<std::size_t>(2 * j)] << ','
            << r.singles[static_cast<std::size_t>(2 * j + 1)] << ',' << r.coincidences(j, n) << ',';
        if (j == 0 && n == 0) out << r.fourfold;
        out << '\n';
      }
    }
  }
}

std::vector<CountsRecord> read_counts_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw ConfigError("unexpected counts CSV header");
  std::vector<CountsRecord> out;
  std::map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() == 8) cells.emplace_back();
    if (cells.size() != 9) throw ConfigError("counts CSV row needs 9 columns: " + line);
    auto [it, fresh] = index.try_emplace(cells[0], out.size());
    if (fresh) {
      out.emplace_back();
      out.back().setting_id = cells[0];
    }
    CountsRecord& r = out[it->second];
    const int j = std::stoi(cells[1]);
    const int n = std::stoi(cells[2]);
    if (j < 0 || j > 1 || std::abs(n) > kMaxDelayBin) throw RangeError("row outside pair/delay range");
    r.pulses = parse_count(cells[3]);
    r.duration = std::stod(cells[4]);
    r.singles[static_cast<std::size_t>(2 * j)] = parse_count(cells[5]);
    r.singles[static_cast<std::size_t>(2 * j + 1)] = parse_count(cells[6]);
    r.twofold[static_cast<std::size_t>(j)][static_cast<std::size_t>(n + kMaxDelayBin)] = parse_count(cells[7]);
    if (!cells[8].empty()) r.fourfold = parse_count(cells[8]);
  }
  return out;
}

nlohmann::json counts_to_json(const CountsRecord& r) {
  nlohmann::json j;
  j["schema"] = kCountsSchema;
  j["setting"] = r.setting_id;
  j["pulses"] = r.pulses;
  j["duration_s"] = r.duration;
  j["singles"] = r.singles;
  j["delays"] = nlohmann::json::array();
  for (int n = -kMaxDelayBin; n <= kMaxDelayBin; ++n) j["delays"].push_back(n);
  j["twofold"] = r.twofold;
  j["fourfold"] = r.fourfold;
  j["pair_outcomes"] = r.pair_outcomes;
  j["four_outcomes"] = r.four_outcomes;
  return j;
}

CountsRecord counts_from_json(const nlohmann::json& j) {
  if (j.value("schema", std::string{}) != kCountsSchema) {
    throw ConfigError("counts JSON must carry schema " + std::string(kCountsSchema));
  }
  CountsRecord r;
  r.setting_id = j.at("setting").get<std::string>();
  r.pulses = j.at("pulses").get<std::uint64_t>();
  r.duration = j.at("duration_s").get<double>();
  r.singles = j.at("singles").get<std::array<std::uint64_t, 4>>();
  r.twofold = j.at("twofold").get<std::array<std::array<std::uint64_t, kDelayBins>, 2>>();
  r.fourfold = j.at("fourfold").get<std::uint64_t>();
  if (j.contains("pair_outcomes")) {
    r.pair_outcomes = j.at("pair_outcomes").get<std::array<std::array<std::uint64_t, 4>, 2>>();
  }
  if (j.contains("four_outcomes")) {
    r.four_outcomes = j.at("four_outcomes").get<std::array<std::uint64_t, 16>>();
  }
  return r;
}

}  // namespace tbent::detection
