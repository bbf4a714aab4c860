#include <gtest/gtest.h>

#include <sstream>

#include "streamlab/csv.hpp"
#include "streamlab/errors.hpp"
#include "streamlab/tables.hpp"

using namespace streamlab;

TEST(Csv, NumberFormat) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(1e-20), "1e-20");
}

TEST(Csv, CommentHeaderAndQuoting) {
  std::ostringstream out;
  CsvWriter w(out, "streamlab test");
  w.header({"a", "b", "c", "d", "e"});
  w.row({1.5, std::int64_t{7}, true, std::monostate{}, std::string("[1,0]")});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# streamlab ", 0), 0U);
  EXPECT_NE(line.find("| streamlab test"), std::string::npos);
  std::getline(in, line);
  EXPECT_EQ(line, "a,b,c,d,e");
  std::getline(in, line);
  EXPECT_EQ(line, "1.5,7,true,,\"[1,0]\"");
}

TEST(Sweep, InclusiveStop) {
  const auto v = parse_sweep("0.41:0.99:0.01");
  ASSERT_EQ(v.size(), 59U);
  EXPECT_DOUBLE_EQ(v.front(), 0.41);
  EXPECT_NEAR(v.back(), 0.99, 1e-12);
  EXPECT_EQ(parse_sweep("0:1:0.05").size(), 21U);
  EXPECT_EQ(parse_sweep("0.5:0.5:0.1").size(), 1U);
}

TEST(Sweep, Malformed) {
  EXPECT_THROW(parse_sweep("0:1"), InvalidArgument);
  EXPECT_THROW(parse_sweep("0:1:0"), InvalidArgument);
  EXPECT_THROW(parse_sweep("1:0:0.1"), InvalidArgument);
  EXPECT_THROW(parse_sweep("a:1:0.1"), InvalidArgument);
}

TEST(Tables, P2pTableShapeAndDeterminism) {
  const int ds[] = {2, 4};
  const auto rows = p2p_tradeoff_table(0.6, ds, {}, 10);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows.front().scheme, "ARQ");
  EXPECT_DOUBLE_EQ(rows.front().tau, 0.6);
  std::ostringstream a, b;
  write_p2p_csv(a, rows, "x");
  write_p2p_csv(b, p2p_tradeoff_table(0.6, ds, {}, 10), "x");
  EXPECT_EQ(a.str(), b.str());
}

TEST(Tables, HullMarksArqAndAllFirst) {
  const auto rows = hull_table(0.6, 3);
  ASSERT_FALSE(rows.empty());
  int on = 0;
  for (const auto& r : rows) {
    ASSERT_TRUE(r.on_hull.has_value());
    on += *r.on_hull;
  }
  EXPECT_GE(on, 2);
  EXPECT_THROW(hull_table(0.6, 13), InvalidArgument);
}

TEST(Tables, MulticastRowsSkipUnstablePoints) {
  const double q2s[] = {0.1, 0.5};
  const auto rows = fig7_rows(0.5, 0.4, 1.0, q2s);
  ASSERT_EQ(rows.size(), 2U);
  EXPECT_FALSE(rows[0].tau2.has_value());
  EXPECT_TRUE(rows[1].tau2.has_value());
}
