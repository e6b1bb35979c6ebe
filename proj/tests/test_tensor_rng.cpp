#include <cmath>

#include "doctest.h"
#include "seqemo/rng.hpp"
#include "seqemo/tensor.hpp"

using namespace seqemo;

TEST_CASE("tensor shape and data stay consistent") {
  Tensor<float> t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  t[4] = 2.5f;
  CHECK(t.mat(2, 3)(1, 1) == 2.5f);
  CHECK_THROWS_AS(Tensor<float>({2, 0}), ShapeError);
  CHECK_THROWS_AS(t.mat(3, 3), ShapeError);
  CHECK_THROWS_AS((Tensor<float>({2, 2}, {1.f, 2.f, 3.f})), ShapeError);
}

TEST_CASE("tensor storage keeps its fixed alignment") {
  // Reduction kernels split packet and scalar work by buffer address, so the
  // storage alignment must never depend on where the heap placed the block.
  for (int64_t n : {1, 3, 16, 257, 4096, 99991}) {
    Tensor<float> tf({n});
    CHECK(reinterpret_cast<std::uintptr_t>(tf.data()) %
              AlignedAllocator<float>::alignment == 0);
    Tensor<double> td({n});
    CHECK(reinterpret_cast<std::uintptr_t>(td.data()) %
              AlignedAllocator<double>::alignment == 0);
  }
  Tensor<float> grown({2});
  grown.values().resize(1000);
  CHECK(reinterpret_cast<std::uintptr_t>(grown.values().data()) %
            AlignedAllocator<float>::alignment == 0);
}

TEST_CASE("tensor finiteness check") {
  Tensor<double> t({3});
  CHECK(t.all_finite());
  t[1] = std::nan("");
  CHECK_FALSE(t.all_finite());
  t[1] = 0.0;
  t[2] = INFINITY;
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("rng matches the reference xoshiro256** stream") {
  // frozen from an independent implementation of splitmix64 + xoshiro256**
  Rng r(42);
  CHECK(r.next_u64() == 0x15780B2E0C2EC716ULL);
  CHECK(r.next_u64() == 0x6104D9866D113A7EULL);
  CHECK(r.next_u64() == 0xAE17533239E499A1ULL);
  CHECK(r.next_u64() == 0xECB8AD4703B360A1ULL);

  Rng u(42);
  CHECK(u.uniform() == doctest::Approx(0.083862971059882163).epsilon(1e-15));
  CHECK(u.uniform() == doctest::Approx(0.37898025066266861).epsilon(1e-15));
  CHECK(u.uniform() == doctest::Approx(0.68004341102813937).epsilon(1e-15));

  CHECK(Rng::mix64(7, 3) == 0xAD50A1DCCBA64D8DULL);
}

TEST_CASE("rng determinism and stream independence") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng parent(9);
  Rng c0 = parent.child(0), c1 = parent.child(1);
  CHECK(c0.next_u64() != c1.next_u64());
  // child derivation does not consume parent state
  Rng parent2(9);
  CHECK(parent.next_u64() == parent2.next_u64());
}

TEST_CASE("rng uniform bounds and normal moments") {
  Rng r(7);
  double mean = 0.0, var = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += u;
  }
  mean /= n;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));

  Rng g(8);
  mean = 0.0;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = g.normal();
    mean += xs[i];
  }
  mean /= n;
  for (int i = 0; i < n; ++i) var += (xs[i] - mean) * (xs[i] - mean);
  var /= n - 1;
  CHECK(mean == doctest::Approx(0.0).epsilon(0.02));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng shuffle is a seeded permutation") {
  std::vector<int> v1{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> v2 = v1;
  Rng a(55), b(55);
  a.shuffle(v1);
  b.shuffle(v2);
  CHECK(v1 == v2);
  std::vector<int> sorted = v1;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}
