#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "plma/instances.hpp"

using namespace plma;

namespace {

const std::string kData = PLMA_DATA_DIR_DEFAULT;

}  // namespace

TEST(ParseQaplib, TwoByTwo) {
  const QapInstance inst = parse_qaplib("2\n0 1\n1 0\n0 2\n2 0");
  ASSERT_EQ(inst.n, 2);
  EXPECT_EQ(inst.flow, (Matrix(2, 2) << 0, 1, 1, 0).finished());
  EXPECT_EQ(inst.dist, (Matrix(2, 2) << 0, 2, 2, 0).finished());
}

TEST(ParseQaplib, SizeOne) {
  const QapInstance inst = parse_qaplib("1\n5\n7");
  EXPECT_EQ(inst.n, 1);
  EXPECT_EQ(inst.flow(0, 0), 5.0);
  EXPECT_EQ(inst.dist(0, 0), 7.0);
}

TEST(ParseQaplib, DistanceFirstSwapsRoles) {
  const QapInstance inst = parse_qaplib("1\n5\n7", MatrixOrder::DistFirst);
  EXPECT_EQ(inst.flow(0, 0), 7.0);
  EXPECT_EQ(inst.dist(0, 0), 5.0);
}

TEST(ParseQaplib, ErrorsNameTheOffset) {
  try {
    parse_qaplib("2\n0 1\n1 x\n0 2\n2 0");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 8u);
    EXPECT_NE(std::string(e.what()).find("at byte 8"), std::string::npos);
  }
  EXPECT_THROW(parse_qaplib("2\n0 1\n1 0\n0 2"), ParseError);
  EXPECT_THROW(parse_qaplib("2\n0 1\n1 0\n0 2\n2 0 9"), ParseError);
  EXPECT_THROW(parse_qaplib("0\n"), ParseError);
  EXPECT_THROW(parse_qaplib("-3\n"), ParseError);
  EXPECT_THROW(parse_qaplib(""), ParseError);
}

TEST(ParseQaplib, RoundTrip) {
  const QapInstance a = gen_uniform(7, 3);
  const QapInstance b = parse_qaplib(write_qaplib(a));
  EXPECT_EQ(a.flow, b.flow);
  EXPECT_EQ(a.dist, b.dist);
}

TEST(ParseQaplib, BundledNug12) {
  const std::string text = read_file(kData + "/qaplib/nug12.dat");
  std::istringstream in(text);
  std::string tok;
  int count = 0;
  while (in >> tok) ++count;
  EXPECT_EQ(count, 1 + 2 * 144);
  const QapInstance inst = load_qaplib(kData + "/qaplib", "nug12");
  EXPECT_EQ(inst.n, 12);
  ASSERT_TRUE(inst.best_known.has_value());
  EXPECT_EQ(*inst.best_known, 578.0);
}

TEST(ParseSln, WithPermutation) {
  const SlnRecord s = parse_sln("3 10\n2 3 1");
  EXPECT_EQ(s.n, 3);
  EXPECT_EQ(s.value, 10.0);
  ASSERT_TRUE(s.perm.has_value());
  EXPECT_EQ(*s.perm, (std::vector<int>{2, 3, 1}));
}

TEST(ParseSln, WithoutPermutation) {
  const SlnRecord s = parse_sln("3 10");
  EXPECT_EQ(s.n, 3);
  EXPECT_FALSE(s.perm.has_value());
}

TEST(ParseSln, RejectsRepeatedImage) {
  try {
    parse_sln("3 10\n1 1 2");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("repeated image 1"), std::string::npos);
  }
  EXPECT_THROW(parse_sln("3 10\n1 2"), ParseError);
  EXPECT_THROW(parse_sln("3 10\n1 2 4"), ParseError);
}

TEST(ParseSln, RoundTrip) {
  SlnRecord s{4, 123.5, std::vector<int>{4, 1, 3, 2}};
  const SlnRecord t = parse_sln(write_sln(s));
  EXPECT_EQ(t.n, 4);
  EXPECT_EQ(t.value, 123.5);
  EXPECT_EQ(t.perm, s.perm);
}

TEST(MatrixMarket, PatternPath) {
  const BmGraph g = parse_matrix_market(
      "%%MatrixMarket matrix coordinate pattern general\n% comment\n3 3 2\n1 2\n2 3\n");
  EXPECT_EQ(g.n, 3);
  EXPECT_EQ(g.edges, (std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}));
}

TEST(MatrixMarket, SymmetricLowerTriangle) {
  const BmGraph g =
      parse_matrix_market("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 3.5\n");
  EXPECT_EQ(g.edges, (std::vector<std::pair<int, int>>{{0, 1}}));
}

TEST(MatrixMarket, DropsDiagonalAndMergesDuplicates) {
  const BmGraph g = parse_matrix_market(
      "%%MatrixMarket matrix coordinate integer general\n3 3 4\n1 1 4\n1 3 1\n3 1 1\n2 2 1\n");
  EXPECT_EQ(g.edges, (std::vector<std::pair<int, int>>{{0, 2}}));
}

TEST(MatrixMarket, Errors) {
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n3 3 1\n4 1\n"),
               ParseError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n"),
               ParseError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n2 3 1\n1 2\n"),
               ParseError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n3 3 2\n1 2\n"),
               ParseError);
}

TEST(BmGraph, AdjacencyIsSymmetricZeroOne) {
  const BmGraph g(4, {{0, 1}, {1, 0}, {2, 2}, {3, 1}});
  EXPECT_EQ(g.edges.size(), 2u);
  const Matrix a = g.adjacency();
  EXPECT_EQ(a, a.transpose());
  EXPECT_EQ(a.diagonal().sum(), 0.0);
  EXPECT_EQ(a.sum(), 4.0);
}

TEST(OrderTable, LongestPrefixWins) {
  const OrderTable t = OrderTable::parse(R"({"tai": "flow_first", "tai12b": "dist_first"})");
  EXPECT_EQ(t.lookup("tai12a"), MatrixOrder::FlowFirst);
  EXPECT_EQ(t.lookup("tai12b"), MatrixOrder::DistFirst);
  EXPECT_EQ(t.lookup("nug12"), MatrixOrder::FlowFirst);
  EXPECT_THROW(OrderTable::parse(R"({"x": "sideways"})"), std::invalid_argument);
}

TEST(GenUniform, Deterministic) {
  const QapInstance a = gen_uniform(5, 7), b = gen_uniform(5, 7);
  EXPECT_EQ(a.flow, b.flow);
  EXPECT_EQ(a.dist, b.dist);
  EXPECT_NE(gen_uniform(5, 8).flow, a.flow);
}

TEST(GenUniform, SymmetricUnitRange) {
  const QapInstance a = gen_uniform(50, 1);
  EXPECT_EQ(a.flow, a.flow.transpose());
  EXPECT_EQ(a.dist, a.dist.transpose());
  EXPECT_GE(a.flow.minCoeff(), 0.0);
  EXPECT_LE(a.flow.maxCoeff(), 1.0);
  EXPECT_GE(a.dist.minCoeff(), 0.0);
  EXPECT_LE(a.dist.maxCoeff(), 1.0);
}

TEST(GenUniform, MeanNearHalf) {
  double sum = 0.0;
  for (int k = 1; k <= 64; ++k) sum += gen_uniform(100, k).flow.mean();
  const double mean = sum / 64;
  EXPECT_GE(mean, 0.47);
  EXPECT_LE(mean, 0.53);
}

TEST(GenGeometric, MetricDistance) {
  const QapInstance g = gen_geometric(15, 4);
  for (int i = 0; i < 15; ++i) {
    EXPECT_EQ(g.dist(i, i), 0.0);
    EXPECT_EQ(g.flow(i, i), 0.0);
    for (int j = 0; j < 15; ++j)
      for (int k = 0; k < 15; ++k) EXPECT_LE(g.dist(i, k), g.dist(i, j) + g.dist(j, k) + 1e-12);
  }
}

TEST(GenGeometric, SeventyPercentSparsity) {
  const int n = 20;
  const QapInstance g = gen_geometric(n, 3);
  EXPECT_EQ(g.flow, g.flow.transpose());
  int zeros = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) zeros += g.flow(i, j) == 0.0;
  const int pairs = n * (n - 1) / 2;
  EXPECT_NEAR(static_cast<double>(zeros) / pairs, 0.70, 1.0 / pairs);
}

TEST(QapInstance, Validate) {
  EXPECT_THROW(QapInstance(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), std::invalid_argument);
  Matrix f = Matrix::Zero(2, 2);
  f(0, 1) = std::nan("");
  EXPECT_THROW(QapInstance(f, Matrix::Zero(2, 2)), std::invalid_argument);
}
