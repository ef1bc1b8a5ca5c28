#include <gtest/gtest.h>

#include <map>

#include "flatsat/census.hpp"
#include "flatsat/classify.hpp"
#include "flatsat/instances.hpp"
#include "oracle.hpp"

using namespace flatsat;

namespace {

std::vector<oracle::Vec> vecs(const PointSet& x) {
  std::vector<oracle::Vec> v;
  for (std::size_t i = 0; i < x.size(); ++i) v.emplace_back(x[i].begin(), x[i].end());
  return v;
}

struct Case {
  std::uint32_t q;
  int d;
  std::size_t n;
};

}  // namespace

class CensusOracle : public ::testing::TestWithParam<Case> {};

TEST_P(CensusOracle, CoplanarCountAndExactSpans) {
  auto c = GetParam();
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    PointSet x = seed % 2 ? random_subset_of_size(c.q, c.d, c.n, seed)
                          : lines_union_instance({c.q, c.d, c.n, 1, 2, 3, c.q, 4 * c.q, seed});
    auto v = vecs(x);
    FlatCensus census(x, c.d - 1);

    // Coplanar (d+1)-subsets by brute force.
    BigInt brute = 0;
    // Exact-span counts keyed by the flat each subset spans, for r = 3.
    std::map<std::uint32_t, long long> spans3;
    oracle::subsets_of_size(x.size(), static_cast<std::size_t>(c.d) + 1, [&](const std::vector<std::size_t>& s) {
      if (oracle::coplanar(oracle::pick(v, s), c.q)) brute += 1;
    });
    EXPECT_EQ(coplanar_dset_count(census, c.d), brute) << "seed " << seed;

    oracle::subsets_of_size(x.size(), 3, [&](const std::vector<std::size_t>& s) {
      IndexSet idx(s.begin(), s.end());
      auto id = census.find_span(idx);
      if (!id) return;
      spans3[*id] += 1;
    });
    for (std::uint32_t id = 0; id < census.size(); ++id) {
      if (census[id].dim < 1 || census[id].dim > 2) continue;
      auto it = spans3.find(id);
      long long want = it == spans3.end() ? 0 : it->second;
      EXPECT_EQ(census.exact_span_count(id, 3), BigInt(want)) << "flat " << census[id].flat.describe();
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Small, CensusOracle, ::testing::Values(Case{5, 2, 14}, Case{3, 3, 14}, Case{5, 3, 16}));

TEST(Census, MembersAreExactlyTheContainedPoints) {
  PointSet x = random_subset_of_size(5, 3, 30, 9);
  FlatCensus census(x, 2);
  for (std::uint32_t id = 0; id < census.size(); ++id) {
    const auto& f = census[id];
    EXPECT_EQ(f.members, members_in_flat(x, f.flat));
    EXPECT_EQ(static_cast<int>(f.spanning.size()), f.dim + 1);
    EXPECT_EQ(span(x, f.spanning), f.flat);
  }
}

TEST(Census, EveryPairSpansACensusLine) {
  PointSet x = random_subset_of_size(7, 2, 20, 3);
  FlatCensus census(x, 1);
  std::size_t pairs = 0;
  for (auto id : census.level(1)) pairs += static_cast<std::size_t>(binomial(census[id].members.size(), 2));
  EXPECT_EQ(pairs, 20u * 19u / 2u);
}

TEST(Census, FullPlaneOverF3) {
  PointSet x = PointSet::full_space(Space(make_field(3), 2));
  FlatCensus census(x, 1);
  EXPECT_EQ(census.level(0).size(), 9u);
  EXPECT_EQ(census.level(1).size(), 12u);
  EXPECT_EQ(coplanar_dset_count(census, 2), BigInt(12));
}

TEST(Census, BudgetIsEnforced) {
  PointSet x = PointSet::full_space(Space(make_field(5), 3));
  EXPECT_THROW(FlatCensus(x, 2, 100), Error);
}
