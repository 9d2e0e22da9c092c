#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedfolio::io {

// Shortest representation that round-trips a double (17 significant digits).
std::string format_double(double v);

// Truncate-writes content in binary mode (LF endings survive untouched) and
// guarantees a trailing newline.
void write_text_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

// One persisted round record row, mirroring the rounds CSV columns.
struct RoundRow {
  std::uint64_t seed = 0;
  std::size_t round = 0;
  std::string strategy;
  double budget = 0.0;
  std::size_t client_id = 0;
  double reward = 0.0;
  double r_i = 0.0;
  double portfolio_return = 0.0;
  double cum_utility = 0.0;
};

extern const char* const kRoundsHeader;

std::string rounds_to_csv(const std::vector<RoundRow>& rows);
std::string rounds_to_jsonl(const std::vector<RoundRow>& rows);
std::vector<RoundRow> read_rounds_csv(const std::string& path);

}  // namespace fedfolio::io
