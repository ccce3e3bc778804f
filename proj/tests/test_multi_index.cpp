#include <catch2/catch_amalgamated.hpp>

#include "hnls/multi_index.hpp"

using namespace hnls;

TEST_CASE("eigenvalue formula") {
  CHECK(eigenvalue({{0, 0, 0}, 2}) == 2);
  CHECK(eigenvalue({{1, 0, 2}, 3}) == 9);
  CHECK(eigenvalue({{5, 0, 0}, 1}) == 11);
}

TEST_CASE("simplex and shell counts") {
  CHECK(simplex_size(20, 2) == 231);
  CHECK(shell_size(4, 2) == 5);
  CHECK(shell_size(4, 3) == 15);
  CHECK(simplex_size(0, 3) == 1);
}

TEST_CASE("graded-lex enumeration round trips through flat_index") {
  for (int d = 1; d <= 3; ++d) {
    auto modes = enumerate_modes(9, d);
    REQUIRE(modes.size() == static_cast<std::size_t>(simplex_size(9, d)));
    for (std::size_t i = 0; i < modes.size(); ++i)
      CHECK(flat_index(modes[i]) == static_cast<std::int64_t>(i));
  }
}

TEST_CASE("clusters are single shells") {
  // j=3, d=2: eigenvalues in [6,8) => shell |l| = 2, 3 members
  auto c = cluster_members(3, 2);
  REQUIRE(c.size() == 3);
  for (const auto& mi : c) {
    CHECK(mi.total() == 2);
    CHECK(eigenvalue(mi) == 6);
  }
  // j=2, d=3: shell |l| = 1, 3 members = j(j+1)/2
  auto c3 = cluster_members(2, 3);
  CHECK(c3.size() == 3);
  CHECK(cluster_size(2, 3) == 3);
  // j=0, d=2: lambda >= 2 always
  CHECK(cluster_members(0, 2).empty());
}

TEST_CASE("cluster cardinalities match exhaustive enumeration up to j=50") {
  for (int d = 2; d <= 3; ++d) {
    for (int j = 1; j <= 50; ++j) {
      // brute force over all multi-indices with eigenvalue below the window top
      std::int64_t count = 0;
      const int lmax = j + 2;
      auto all = enumerate_modes(lmax, d);
      for (const auto& mi : all) {
        const int lam = eigenvalue(mi);
        if (lam >= 2 * j && lam < 2 * (j + 1)) ++count;
      }
      CHECK(cluster_size(j, d) == count);
      CHECK(static_cast<std::int64_t>(cluster_members(j, d).size()) == count);
      if (d == 2) CHECK(cluster_size(j, 2) == j);
      if (d == 3) CHECK(cluster_size(j, 3) == static_cast<std::int64_t>(j) * (j + 1) / 2);
    }
  }
}

TEST_CASE("shell ranges are contiguous cluster slices") {
  auto table = ModeTable::get(2, 12);
  auto [b, e] = table->shell_range(5);
  CHECK(e - b == static_cast<std::size_t>(shell_size(5, 2)));
  for (std::size_t i = b; i < e; ++i) CHECK(table->mode(i).total() == 5);
}
