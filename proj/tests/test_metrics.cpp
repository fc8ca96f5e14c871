#include <doctest.h>

#include <sstream>

#include "cbrsim/metrics.hpp"

using namespace cbrsim;

namespace {

RunResult make_result(long generated, long delivered, long transmissions, double total_delay) {
  RunResult r;
  r.generated = generated;
  r.delivered = delivered;
  r.transmissions = transmissions;
  r.total_delay = total_delay;
  return r;
}

// Minimal CSV reader used to check the writer against an independent parser.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      row.push_back(field);
      field.clear();
      rows.push_back(row);
      row.clear();
      ++i;
    } else {
      field += c;
    }
  }
  return rows;
}

}  // namespace

TEST_CASE("routing gain is the percent reduction in cost") {
  CHECK(routing_gain(10, 4) == doctest::Approx(60.0));
  CHECK(routing_gain(10, 10) == doctest::Approx(0.0));
  CHECK(routing_gain(10, 13) == doctest::Approx(-30.0));
  CHECK_THROWS_AS(routing_gain(0, 5), MetricsError);
}

TEST_CASE("rate change is relative to the baseline") {
  CHECK(rate_change(0.8, 0.84) == doctest::Approx(0.05));
  CHECK(rate_change(0.8, 0.8) == doctest::Approx(0.0));
  CHECK(rate_change(0.8, 0.4) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(rate_change(0.0, 0.1), MetricsError);
}

TEST_CASE("aggregation averages repetitions arithmetically") {
  const std::vector<RunResult> reps = {make_result(100, 40, 200, 400.0),
                                       make_result(100, 60, 300, 1200.0)};
  const AggRow row = aggregate("x", reps);
  CHECK(row.reps == 2);
  CHECK(row.generated == doctest::Approx(100.0));
  CHECK(row.delivered == doctest::Approx(50.0));
  CHECK(row.delivery_ratio == doctest::Approx(0.5));
  CHECK(row.transmissions == doctest::Approx(250.0));
  CHECK(row.cost_defined);
  CHECK(row.cost == doctest::Approx((200.0 / 40.0 + 300.0 / 60.0) / 2.0));
  CHECK(row.mean_delay == doctest::Approx((10.0 + 20.0) / 2.0));
  CHECK(row.rep_transmissions == std::vector<double>{200.0, 300.0});
}

TEST_CASE("cost is undefined when any repetition delivered nothing") {
  const AggRow row = aggregate("x", {make_result(10, 5, 20, 50.0), make_result(10, 0, 7, 0.0)});
  CHECK(!row.cost_defined);
  CHECK(!row.delay_defined);
  CHECK(row.delivery_ratio == doctest::Approx(0.25));
  CHECK(row.rep_mean_delay.size() == 1);
  CHECK_THROWS_AS(aggregate("x", {}), MetricsError);
}

TEST_CASE("baseline comparisons use cost, delivery ratio, and delay") {
  std::vector<AggRow> rows;
  rows.push_back(aggregate("base", {make_result(100, 50, 500, 500.0)}));   // cost 10, delay 10
  rows.push_back(aggregate("better", {make_result(100, 50, 200, 250.0)}));  // cost 4, delay 5
  rows.push_back(aggregate("dead", {make_result(100, 0, 50, 0.0)}));
  add_baseline_comparisons(rows, "base");
  CHECK(!rows[0].gain);  // baseline row stays blank
  REQUIRE(rows[1].gain);
  CHECK(*rows[1].gain == doctest::Approx(60.0));
  CHECK(*rows[1].delivery_change == doctest::Approx(0.0));
  CHECK(*rows[1].delay_change == doctest::Approx(-0.5));
  CHECK(!rows[2].gain);  // undefined cost: left blank
  REQUIRE(rows[2].delivery_change);
  CHECK(*rows[2].delivery_change == doctest::Approx(-1.0));
  CHECK_THROWS_AS(add_baseline_comparisons(rows, "missing"), MetricsError);
}

TEST_CASE("csv quoting follows the usual escaping rules") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("he said \"hi\"") == "\"he said \"\"hi\"\"\"");
  CHECK(csv_quote("two\nlines") == "\"two\nlines\"");
  CHECK(csv_quote("") == "");
}

TEST_CASE("csv output round-trips through an independent parser") {
  std::vector<AggRow> rows;
  rows.push_back(aggregate("epidemic", {make_result(100, 80, 900, 8000.0)}));
  rows.push_back(aggregate("tricky,label \"q\"", {make_result(100, 40, 200, 2000.0)}));
  add_baseline_comparisons(rows, "epidemic");
  const std::string csv = to_csv(rows);
  const auto grid = parse_csv(csv);
  REQUIRE(grid.size() == 3);
  REQUIRE(grid[0].size() == 13);
  CHECK(grid[0][0] == "label");
  CHECK(grid[1][0] == "epidemic");
  CHECK(grid[2][0] == "tricky,label \"q\"");
  CHECK(std::stod(grid[1][4]) == doctest::Approx(0.8));  // delivery_ratio
  CHECK(std::stod(grid[2][6]) == doctest::Approx(5.0));  // cost
  CHECK(std::stod(grid[2][10]) == doctest::Approx(routing_gain(900.0 / 80.0, 5.0)).epsilon(1e-3));
  CHECK(grid[1][10].empty());  // baseline has no gain column value
}

TEST_CASE("table output aligns columns and leaves undefined cells empty") {
  std::vector<AggRow> rows;
  rows.push_back(aggregate("a", {make_result(10, 0, 5, 0.0)}));
  const std::string table = to_table(rows);
  std::istringstream in(table);
  std::string header, line;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, line));
  CHECK(header.substr(0, 5) == "label");
  CHECK(line.substr(0, 1) == "a");
  CHECK(header.size() == line.size());  // every column padded to a shared width
  CHECK(!std::getline(in, line));
}
