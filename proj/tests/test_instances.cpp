#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "ccorl/common.hpp"
#include "ccorl/instances.hpp"
#include "support.hpp"

using namespace ccorl;

TEST(Orlib, ParsesTwoByTwo) {
  const auto inst = parse_orlib("2 2\n0 3 1 2\n1 2 0 4");
  EXPECT_EQ(inst.n_jobs, 2);
  EXPECT_EQ(inst.n_machines, 2);
  EXPECT_EQ(inst.machines, (std::vector<int>{0, 1, 1, 0}));
  EXPECT_EQ(inst.durations, (std::vector<int>{3, 2, 2, 4}));
}

TEST(Orlib, ParsesSingleOperation) {
  const auto inst = parse_orlib("1 1\n0 5");
  EXPECT_EQ(inst.n_jobs, 1);
  EXPECT_EQ(inst.machines, std::vector<int>{0});
  EXPECT_EQ(inst.durations, std::vector<int>{5});
}

TEST(Orlib, SkipsCommentsAndBlankLines) {
  const auto inst = parse_orlib("# a dataset note\n\n2 2\n# job 0\n0 3 1 2\n\n1 2 0 4\n");
  EXPECT_EQ(inst, test::two_by_two());
}

TEST(Orlib, RejectsNonPermutationRow) {
  try {
    parse_orlib("2 2\n0 3 0 2\n1 2 0 4");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("machine row 0 is not a permutation"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Orlib, ReportsLineNumbers) {
  auto message = [](const char* text) {
    try {
      parse_orlib(text);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("2 x\n0 3 1 2\n1 2 0 4").find("line 1"), std::string::npos);
  EXPECT_NE(message("2 2\n0 3 1 2\n1 2 0").find("line 3"), std::string::npos);
  EXPECT_NE(message("2 2\n0 3 1 0\n1 2 0 4").find("line 2"), std::string::npos);
  EXPECT_NE(message("2 2\n0 3 1 2\n").find("line"), std::string::npos);
  EXPECT_NE(message("").find("line 1"), std::string::npos);
}

TEST(Orlib, WritesCanonicalText) {
  EXPECT_EQ(write_orlib(parse_orlib("1 1\n0 5")), "1 1\n0 5\n");
  EXPECT_EQ(write_orlib(test::two_by_two()), test::kTwoByTwo);
}

TEST(Orlib, RoundTripsGeneratedInstances) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = gen_jsp(1 + seed % 7, 1 + seed % 5, 1, 99, seed);
    EXPECT_EQ(parse_orlib(write_orlib(inst)), inst);
  }
}

TEST(GenJsp, DegenerateRangeGivesUnitDurations) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto inst = gen_jsp(2, 2, 1, 1, seed);
    EXPECT_TRUE(std::all_of(inst.durations.begin(), inst.durations.end(), [](int d) { return d == 1; }));
  }
}

TEST(GenJsp, DeterministicPerSeed) {
  EXPECT_EQ(write_orlib(gen_jsp(10, 10, 1, 99, 42)), write_orlib(gen_jsp(10, 10, 1, 99, 42)));
  EXPECT_NE(write_orlib(gen_jsp(10, 10, 1, 99, 42)), write_orlib(gen_jsp(10, 10, 1, 99, 43)));
}

TEST(GenJsp, RowsArePermutationsAndDurationsInRange) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = gen_jsp(5, 4, 3, 17, seed);
    EXPECT_NO_THROW(inst.validate());
    for (int d : inst.durations) {
      EXPECT_GE(d, 3);
      EXPECT_LE(d, 17);
    }
  }
}

TEST(GenJsp, MeanDurationMatchesUniformIntegers) {
  // 10^4 draws from U{1..99}: mean 50, standard error about 0.28.
  const auto inst = gen_jsp(100, 100, 1, 99, 7);
  const double mean = std::accumulate(inst.durations.begin(), inst.durations.end(), 0.0) / inst.durations.size();
  EXPECT_NEAR(mean, 50.0, 1.0);
}

TEST(GenJsp, RejectsBadBounds) {
  EXPECT_THROW(gen_jsp(0, 2, 1, 5, 0), ValidationError);
  EXPECT_THROW(gen_jsp(2, 0, 1, 5, 0), ValidationError);
  EXPECT_THROW(gen_jsp(2, 2, 0, 5, 0), ValidationError);
  EXPECT_THROW(gen_jsp(2, 2, 6, 5, 0), ValidationError);
}

TEST(GenVrap, TenHostScale) {
  const auto inst = gen_vrap(10, 10, 5, 3);
  EXPECT_EQ(inst.n_hosts(), 10);
  EXPECT_EQ(inst.vm_catalog.size(), 10u);
  EXPECT_EQ(inst.chain_length(), 5);
  EXPECT_NO_THROW(inst.validate());
  for (const auto& o : inst.initial_occupancy) {
    EXPECT_GE(o.cpu, 0.0);
    EXPECT_LT(o.cpu, 1.0);
  }
}

TEST(GenVrap, DeterministicAndMinimalChain) {
  EXPECT_EQ(gen_vrap(4, 6, 3, 11), gen_vrap(4, 6, 3, 11));
  EXPECT_NE(gen_vrap(4, 6, 3, 11), gen_vrap(4, 6, 3, 12));
  const auto one = gen_vrap(3, 2, 1, 5);
  EXPECT_EQ(one.chain_length(), 1);
  EXPECT_NO_THROW(one.validate());
  EXPECT_THROW(gen_vrap(0, 2, 1, 5), ValidationError);
  EXPECT_THROW(gen_vrap(2, 0, 1, 5), ValidationError);
  EXPECT_THROW(gen_vrap(2, 2, 0, 5), ValidationError);
}

TEST(Vrap, TextRoundTrip) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = gen_vrap(1 + seed % 6, 1 + seed % 4, 1 + seed % 5, seed);
    const auto text = write_vrap(inst);
    EXPECT_EQ(text.rfind("vrap-v1\n", 0), 0u);
    EXPECT_EQ(parse_vrap(text), inst);
    EXPECT_EQ(write_vrap(parse_vrap(text)), text);
  }
}

TEST(Vrap, RejectsInvalidDocuments) {
  const auto good = write_vrap(gen_vrap(2, 2, 2, 1));
  EXPECT_THROW(parse_vrap("vrap-v2\n" + good.substr(8)), ValidationError);
  EXPECT_THROW(parse_vrap(good.substr(0, good.size() / 2)), ValidationError);
  auto inst = gen_vrap(2, 2, 2, 1);
  inst.chain[0] = 5;
  EXPECT_THROW(inst.validate(), ValidationError);
  inst = gen_vrap(2, 2, 2, 1);
  inst.initial_occupancy[0].cpu = 1.5;
  EXPECT_THROW(inst.validate(), ValidationError);
}

TEST(Numbers, ShortestRoundTrip) {
  for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) EXPECT_EQ(parse_double(format_double(v)), v);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_THROW(parse_double("1.0x"), ValidationError);
}

TEST(Dataset, ListsLexicographicallyWithoutManifest) {
  test::TempDir dir("dataset");
  for (const char* name : {"b.txt", "a.txt", "manifest.txt", ".hidden", "c.txt"}) write_file(dir.file(name), "x");
  const auto files = list_dataset(dir.path());
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(files[0].filename(), "a.txt");
  EXPECT_EQ(files[2].filename(), "c.txt");
  EXPECT_THROW(list_dataset(dir.path() / "missing"), IoError);
  EXPECT_THROW(load_jsp(dir.path() / "missing.txt"), IoError);
}
