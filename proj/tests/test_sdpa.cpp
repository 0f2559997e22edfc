#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "roa/hierarchy.hpp"
#include "roa/sdp.hpp"

using namespace roa;
using namespace roa::sdp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Problem two_by_two() {
  Problem p;
  p.add_block(2);
  p.add_constraint(1.0);
  p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}};
  p.constraints[0] = {{0, 0, 1, -1.0}};
  return p;
}

}  // namespace

TEST(Sdpa, GoldenTwoByTwo) {
  const std::string golden = read_file(std::string(ROA_TEST_DATA) + "/sdpa_2x2_golden.dat-s");
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(export_sdpa(two_by_two()), golden);
  EXPECT_EQ(std::count(golden.begin(), golden.end(), '\n'), 7);
}

TEST(Sdpa, RoundTripIsByteIdentical) {
  const std::string golden = read_file(std::string(ROA_TEST_DATA) + "/sdpa_2x2_golden.dat-s");
  EXPECT_EQ(export_sdpa(parse_sdpa(golden)), golden);

  // A hierarchy problem with free variables, diagonal and full blocks.
  const Assembly a = build_outer_sos(test::decay_system(), 2);
  const std::string text = export_sdpa(a.problem);
  const std::string again = export_sdpa(parse_sdpa(text));
  EXPECT_EQ(again, text);
}

TEST(Sdpa, ExportIsDeterministic) {
  const Assembly a = build_outer_sos(test::decay_system(), 2);
  const Assembly b = build_outer_sos(test::decay_system(), 2);
  EXPECT_EQ(export_sdpa(a.problem), export_sdpa(b.problem));
}

TEST(Sdpa, ParsedProblemSolvesToTheSameOptimum) {
  const Solution s = solve(parse_sdpa(export_sdpa(two_by_two())));
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.dual_obj, 1.0, 1e-7);
}

TEST(Sdpa, FreeVariablesBecomeASplitDiagonalBlock) {
  Problem p = two_by_two();
  const int u = p.add_free(2.0);
  p.free_vars[static_cast<std::size_t>(u)].coeffs = {{0, 1.0}};
  const Problem q = parse_sdpa(export_sdpa(p));
  ASSERT_EQ(q.block_dims, (std::vector<int>{2, -2}));
  EXPECT_TRUE(q.free_vars.empty());
}

TEST(Sdpa, ToleratesCommentsAndPunctuation) {
  const std::string text =
      "\"a comment\n"
      "* another\n"
      "1 =mDIM\n"
      "1 =nBLOCK\n"
      "{2}\n"
      "{1.0}\n"
      "0 1 1 1 -1.0\n"
      "0 1 2 2 -1.0\n"
      "1 1 2 1 -1.0\n";
  EXPECT_EQ(export_sdpa(parse_sdpa(text)), export_sdpa(two_by_two()));
}

TEST(Sdpa, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    try {
      parse_sdpa(text);
    } catch (const SdpaParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("1\n1\n2\n1.0\n0 1 1 1\n"), 5);
  EXPECT_EQ(line_of("1\n1\n2\n1.0\n0 1 3 3 1.0\n"), 5);
  EXPECT_EQ(line_of("x\n1\n2\n1.0\n"), 1);
  EXPECT_EQ(line_of("1\n1\n0\n1.0\n"), 3);
  EXPECT_EQ(line_of("1\n1\n-2\n1.0\n0 1 1 2 1.0\n"), 5);
  EXPECT_EQ(line_of("1\n1\n2\n1.0\n2 1 1 1 1.0\n"), 5);
  EXPECT_THROW(parse_sdpa("1\n1\n"), SdpaParseError);
}
