#include "fedfolio/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedfolio/error.hpp"
#include "json.hpp"

namespace fedfolio::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw Error(ErrorCategory::kIo, "cannot open for writing: " + path);
  }
  f << content;
  if (content.empty() || content.back() != '\n') f << '\n';
  f.flush();
  if (!f) {
    throw Error(ErrorCategory::kIo, "write failed: " + path);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw Error(ErrorCategory::kIo, "cannot open for reading: " + path);
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* const kRoundsHeader =
    "seed,round,strategy,budget,client_id,reward,r_i,R_p,cum_U";

std::string rounds_to_csv(const std::vector<RoundRow>& rows) {
  std::string out(kRoundsHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.round);
    out += ',';
    out += r.strategy;
    out += ',';
    out += format_double(r.budget);
    out += ',';
    out += std::to_string(r.client_id);
    out += ',';
    out += format_double(r.reward);
    out += ',';
    out += format_double(r.r_i);
    out += ',';
    out += format_double(r.portfolio_return);
    out += ',';
    out += format_double(r.cum_utility);
    out += '\n';
  }
  return out;
}

std::string rounds_to_jsonl(const std::vector<RoundRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    nlohmann::json j;
    j["seed"] = r.seed;
    j["round"] = r.round;
    j["strategy"] = r.strategy;
    j["budget"] = r.budget;
    j["client_id"] = r.client_id;
    j["reward"] = r.reward;
    j["r_i"] = r.r_i;
    j["R_p"] = r.portfolio_return;
    j["cum_U"] = r.cum_utility;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<RoundRow> read_rounds_csv(const std::string& path) {
  std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRoundsHeader) {
    throw Error(ErrorCategory::kIo,
                "unexpected rounds CSV header in " + path);
  }
  std::vector<RoundRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 9) {
      throw Error(ErrorCategory::kIo, "bad rounds CSV row at line " +
                                          std::to_string(line_no) + " in " +
                                          path);
    }
    RoundRow r;
    try {
      r.seed = std::stoull(fields[0]);
      r.round = std::stoul(fields[1]);
      r.strategy = fields[2];
      r.budget = std::stod(fields[3]);
      r.client_id = std::stoul(fields[4]);
      r.reward = std::stod(fields[5]);
      r.r_i = std::stod(fields[6]);
      r.portfolio_return = std::stod(fields[7]);
      r.cum_utility = std::stod(fields[8]);
    } catch (const std::exception&) {
      throw Error(ErrorCategory::kIo, "unparsable rounds CSV row at line " +
                                          std::to_string(line_no) + " in " +
                                          path);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace fedfolio::io
