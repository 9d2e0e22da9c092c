#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "fedfolio/error.hpp"
#include "fedfolio/io.hpp"

using namespace fedfolio;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("format_double round-trips awkward values") {
  // No subnormals here: glibc's stod raises out_of_range for them even
  // though strtod parses the text exactly.
  for (double v : {0.1, 1.0 / 3.0, -2.7182818284590452, 1e300, 2.2250738585072014e-308,
                   0.0, 123456789.123456789}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("write_text_file truncates, uses LF and ends with a newline") {
  const std::string path = temp_path("fedfolio_io_test.txt");
  io::write_text_file(path, "long first content\nwith two lines");
  io::write_text_file(path, "short");
  std::string got = io::read_text_file(path);
  CHECK(got == "short\n");
  CHECK(got.find('\r') == std::string::npos);

  io::write_text_file(path, "already terminated\n");
  CHECK(io::read_text_file(path) == "already terminated\n");
  std::remove(path.c_str());

  CHECK_THROWS_AS(io::write_text_file("/nonexistent-dir/x/y.txt", "a"),
                  Error);
  CHECK_THROWS_AS(io::read_text_file(temp_path("fedfolio_io_missing.txt")),
                  Error);
}

TEST_CASE("rounds CSV empty result is header-only") {
  std::string csv = io::rounds_to_csv({});
  CHECK(csv == std::string(io::kRoundsHeader) + "\n");
}

TEST_CASE("rounds CSV round-trips to identical values") {
  std::vector<io::RoundRow> rows(2);
  rows[0].seed = 42;
  rows[0].round = 1;
  rows[0].strategy = "portfolio";
  rows[0].budget = 400.0;
  rows[0].client_id = 7;
  rows[0].reward = 1.0 / 3.0;
  rows[0].r_i = -0.0123456789012345678;
  rows[0].portfolio_return = 0.1;
  rows[0].cum_utility = 0.1;
  rows[1] = rows[0];
  rows[1].round = 2;
  rows[1].client_id = 8;
  rows[1].cum_utility = 0.2;

  const std::string path = temp_path("fedfolio_rounds_test.csv");
  io::write_text_file(path, io::rounds_to_csv(rows));
  auto back = io::read_rounds_csv(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].round == rows[i].round);
    CHECK(back[i].strategy == rows[i].strategy);
    CHECK(back[i].budget == rows[i].budget);
    CHECK(back[i].client_id == rows[i].client_id);
    CHECK(back[i].reward == rows[i].reward);
    CHECK(back[i].r_i == rows[i].r_i);
    CHECK(back[i].portfolio_return == rows[i].portfolio_return);
    CHECK(back[i].cum_utility == rows[i].cum_utility);
  }
  std::remove(path.c_str());
}

TEST_CASE("json-lines holds one object per row") {
  std::vector<io::RoundRow> rows(3);
  for (std::size_t i = 0; i < 3; ++i) {
    rows[i].round = i + 1;
    rows[i].strategy = "greedy";
  }
  std::string jsonl = io::rounds_to_jsonl(rows);
  std::size_t lines = 0;
  for (char c : jsonl) lines += c == '\n';
  CHECK(lines == 3);
  CHECK(jsonl.find("\"strategy\":\"greedy\"") != std::string::npos);
}
