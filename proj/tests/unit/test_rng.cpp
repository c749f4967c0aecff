#include <doctest.h>

#include <cmath>
#include <set>

#include "alseg/rng.hpp"

using namespace alseg;

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform stays in [0,1) and has the right mean") {
  Rng rng(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = rng.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    sum += v;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 0.01);
}

TEST_CASE("uniform_index is unbiased over a small range") {
  Rng rng(7);
  int counts[10] = {0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[rng.uniform_index(10)]++;
  for (int c : counts) CHECK(std::abs(c - n / 10) < 5 * std::sqrt(n / 10.0));
}

TEST_CASE("normal moments") {
  Rng rng(3);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("derived seeds differ by tag and index") {
  const auto a = derive_seed(5, "train", 0);
  const auto b = derive_seed(5, "train", 1);
  const auto c = derive_seed(5, "score", 0);
  const auto d = derive_seed(6, "train", 0);
  std::set<std::uint64_t> s{a, b, c, d};
  CHECK(s.size() == 4);
  CHECK(derive_seed(5, "train", 0) == a);
}

TEST_CASE("sample_without_replacement yields distinct indices") {
  Rng rng(11);
  const auto idx = rng.sample_without_replacement(50, 20);
  CHECK(idx.size() == 20);
  std::set<std::size_t> s(idx.begin(), idx.end());
  CHECK(s.size() == 20);
  for (auto i : idx) CHECK(i < 50);
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(13);
  std::vector<int> v;
  for (int i = 0; i < 100; ++i) v.push_back(i);
  auto w = v;
  rng.shuffle(w);
  CHECK(w != v);
  std::sort(w.begin(), w.end());
  CHECK(w == v);
}
