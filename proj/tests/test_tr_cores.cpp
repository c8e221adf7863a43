#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "trwopt/tensor.hpp"
#include "trwopt/tr_cores.hpp"

using trwopt::DenseTensor;
using trwopt::Matrix;
using trwopt::TRCores;

namespace {

// Brute-force ring contraction: sum over every closed chain of rank indices.
// Independent of the slice/trace machinery under test.
double ring_sum_oracle(const TRCores& cores, const std::vector<std::size_t>& index) {
    const std::size_t n = cores.order();
    const auto ranks = cores.ranks();
    double total = 0.0;
    std::vector<std::size_t> r(n, 0);  // r[k] is the bond entering core k+1
    while (true) {
        double prod = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            const DenseTensor& g = cores.cores()[k];
            const std::size_t rl = ranks[k];
            const std::size_t len = g.dims()[1];
            const std::size_t rn = r[(k + 1) % n];
            prod *= g[r[k] + rl * (index[k] + len * rn)];
        }
        total += prod;
        std::size_t k = 0;
        while (k < n && ++r[k] == ranks[k]) r[k++] = 0;
        if (k == n) return total;
    }
}

DenseTensor random_core(std::size_t rl, std::size_t len, std::size_t rr, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> data(rl * len * rr);
    for (double& v : data) v = u(rng);
    return DenseTensor({rl, len, rr}, std::move(data));
}

template <typename Fn>
void for_each_index(const std::vector<std::size_t>& dims, Fn&& fn) {
    std::vector<std::size_t> idx(dims.size(), 0);
    while (true) {
        fn(idx);
        std::size_t k = 0;
        while (k < dims.size() && ++idx[k] == dims[k]) idx[k++] = 0;
        if (k == dims.size()) return;
    }
}

void check_close(const DenseTensor& got, const DenseTensor& want, double tol) {
    REQUIRE(got.dims() == want.dims());
    double diff = trwopt::frobenius_norm(trwopt::subtract(got, want));
    double scale = std::max(1.0, trwopt::frobenius_norm(want));
    CHECK(diff <= tol * scale);
}

}  // namespace

TEST_CASE("ring construction validates core shapes and closure") {
    // Single core: no ring.
    CHECK_THROWS_AS(TRCores({random_core(2, 3, 2, 1)}), std::invalid_argument);
    // Adjacent rank disagreement.
    CHECK_THROWS_AS(TRCores({random_core(2, 3, 3, 1), random_core(2, 3, 2, 2)}),
                    std::invalid_argument);
    // Broken closure: last right rank must wrap to the first left rank.
    CHECK_THROWS_AS(TRCores({random_core(2, 3, 3, 1), random_core(3, 3, 4, 2)}),
                    std::invalid_argument);
    // Non third-order member.
    CHECK_THROWS_AS(TRCores({DenseTensor({2, 2}), DenseTensor({2, 2})}), std::invalid_argument);

    TRCores ok({random_core(2, 3, 3, 1), random_core(3, 4, 2, 2)});
    CHECK(ok.order() == 2);
    CHECK(ok.dims() == std::vector<std::size_t>{3, 4});
    CHECK(ok.ranks() == std::vector<std::size_t>{2, 3, 2});
    CHECK(ok.parameter_count() == 2 * 3 * 3 + 3 * 4 * 2);
}

TEST_CASE("mode-2 slices pick the expected entries") {
    // Core entries 1..12 in layout order, dims (2,3,2).
    std::vector<double> data(12);
    for (std::size_t i = 0; i < 12; ++i) data[i] = double(i + 1);
    TRCores cores({DenseTensor({2, 3, 2}, data), random_core(2, 2, 2, 3)});

    Matrix s = cores.slice(1, 1);  // second index of the middle mode
    REQUIRE(s.rows() == 2);
    REQUIRE(s.cols() == 2);
    CHECK(s(0, 0) == 3.0);
    CHECK(s(1, 0) == 4.0);
    CHECK(s(0, 1) == 9.0);
    CHECK(s(1, 1) == 10.0);

    CHECK_THROWS_AS(cores.slice(1, 3), std::out_of_range);
    CHECK_THROWS_AS(cores.slice(3, 0), std::out_of_range);

    // Restacking every slice reproduces the core.
    const DenseTensor& g = cores.core(1);
    for (std::size_t i = 0; i < 3; ++i) {
        Matrix si = cores.slice(1, i);
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t s2 = 0; s2 < 2; ++s2) CHECK(si(r, s2) == g.at({r, i, s2}));
    }

    // Rank-1 ring: slices are 1x1.
    TRCores r1({DenseTensor({1, 2, 1}, {2.0, 3.0}), DenseTensor({1, 2, 1}, {5.0, 7.0})});
    CHECK(r1.slice(2, 1).rows() == 1);
    CHECK(r1.slice(2, 1)(0, 0) == 7.0);
}

TEST_CASE("element reconstruction: scalar ring and identity slices") {
    TRCores r1({DenseTensor({1, 2, 1}, {2.0, 3.0}), DenseTensor({1, 3, 1}, {5.0, 7.0, 11.0}),
                DenseTensor({1, 2, 1}, {13.0, 17.0})});
    CHECK(trwopt::reconstruct_elem(r1, {1, 2, 0}) == Catch::Approx(3.0 * 11.0 * 13.0));

    // Both slices the 2x2 identity: trace(I*I) = 2.
    std::vector<double> eye = {1.0, 0.0, 0.0, 1.0};
    TRCores id({DenseTensor({2, 1, 2}, eye), DenseTensor({2, 1, 2}, eye)});
    CHECK(trwopt::reconstruct_elem(id, {0, 0}) == 2.0);
}

TEST_CASE("element reconstruction matches the brute-force ring sum") {
    TRCores cores({random_core(2, 2, 2, 10), random_core(2, 2, 2, 11), random_core(2, 2, 2, 12)});
    for_each_index({2, 2, 2}, [&](const std::vector<std::size_t>& idx) {
        double got = trwopt::reconstruct_elem(cores, idx);
        double want = ring_sum_oracle(cores, idx);
        CHECK(got == Catch::Approx(want).margin(1e-12));
    });

    TRCores four({random_core(2, 3, 3, 20), random_core(3, 2, 2, 21), random_core(2, 2, 3, 22),
                  random_core(3, 2, 2, 23)});
    std::mt19937_64 rng(99);
    for (int t = 0; t < 20; ++t) {
        std::vector<std::size_t> idx = {rng() % 3, rng() % 2, rng() % 2, rng() % 2};
        CHECK(trwopt::reconstruct_elem(four, idx) ==
              Catch::Approx(ring_sum_oracle(four, idx)).margin(1e-12));
    }
}

TEST_CASE("trace is invariant under cyclic rotation of the ring") {
    std::vector<DenseTensor> cs = {random_core(2, 3, 3, 31), random_core(3, 2, 2, 32),
                                   random_core(2, 4, 2, 33)};
    TRCores cores(cs);
    TRCores rotated({cs[1], cs[2], cs[0]});
    std::mt19937_64 rng(7);
    for (int t = 0; t < 25; ++t) {
        std::vector<std::size_t> idx = {rng() % 3, rng() % 2, rng() % 4};
        std::vector<std::size_t> ridx = {idx[1], idx[2], idx[0]};
        double a = trwopt::reconstruct_elem(cores, idx);
        double b = trwopt::reconstruct_elem(rotated, ridx);
        CHECK(a == Catch::Approx(b).epsilon(1e-12).margin(1e-12));
    }
}

TEST_CASE("unit boundary ranks reduce the ring to a plain train") {
    // Ranks (1, 3, 2, 1): value is row-vector x matrix x column-vector.
    TRCores cores({random_core(1, 3, 3, 41), random_core(3, 4, 2, 42), random_core(2, 2, 1, 43)});
    std::mt19937_64 rng(44);
    for (int t = 0; t < 25; ++t) {
        std::vector<std::size_t> idx = {rng() % 3, rng() % 4, rng() % 2};
        // Train oracle: chain the slices without any boundary summation.
        std::vector<double> vec(3);
        for (std::size_t r = 0; r < 3; ++r) vec[r] = cores.core(1).at({0, idx[0], r});
        std::vector<double> nxt(2, 0.0);
        for (std::size_t s = 0; s < 2; ++s)
            for (std::size_t r = 0; r < 3; ++r)
                nxt[s] += vec[r] * cores.core(2).at({r, idx[1], s});
        double want = 0.0;
        for (std::size_t s = 0; s < 2; ++s) want += nxt[s] * cores.core(3).at({s, idx[2], 0});
        CHECK(trwopt::reconstruct_elem(cores, idx) == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("full reconstruction of a rank-1 ring is the outer product") {
    std::vector<double> a = {2.0, 3.0}, b = {5.0, 7.0, 11.0};
    TRCores cores({DenseTensor({1, 2, 1}, a), DenseTensor({1, 3, 1}, b)});
    DenseTensor x = trwopt::reconstruct_full(cores);
    REQUIRE(x.dims() == std::vector<std::size_t>{2, 3});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(x.at({i, j}) == Catch::Approx(a[i] * b[j]));
}

TEST_CASE("full reconstruction agrees with the element path") {
    TRCores small({random_core(2, 3, 3, 51), random_core(3, 4, 2, 52), random_core(2, 2, 2, 53)});
    DenseTensor x = trwopt::reconstruct_full(small);
    for_each_index({3, 4, 2}, [&](const std::vector<std::size_t>& idx) {
        CHECK(x.at(idx) == Catch::Approx(trwopt::reconstruct_elem(small, idx))
                               .epsilon(1e-12)
                               .margin(1e-12));
    });

    // 6-D ring, all ranks 2, spot-checked at random indices.
    std::vector<DenseTensor> cs;
    for (int k = 0; k < 6; ++k) cs.push_back(random_core(2, 3, 2, 60 + k));
    TRCores big(cs);
    DenseTensor xb = trwopt::reconstruct_full(big);
    std::mt19937_64 rng(61);
    for (int t = 0; t < 50; ++t) {
        std::vector<std::size_t> idx(6);
        for (auto& i : idx) i = rng() % 3;
        CHECK(xb.at(idx) == Catch::Approx(trwopt::reconstruct_elem(big, idx))
                                .epsilon(1e-12)
                                .margin(1e-12));
    }
}

TEST_CASE("two-core subchain is the other core verbatim") {
    DenseTensor g1 = random_core(2, 3, 3, 71);
    DenseTensor g2 = random_core(3, 4, 2, 72);
    TRCores cores({g1, g2});
    DenseTensor sub = trwopt::subchain(cores, 1);
    REQUIRE(sub.dims() == g2.dims());
    CHECK(sub.values() == g2.values());
    DenseTensor sub2 = trwopt::subchain(cores, 2);
    CHECK(sub2.values() == g1.values());
}

TEST_CASE("rank-1 subchain entries are products of the remaining vectors") {
    std::vector<double> a = {2.0, 3.0}, b = {5.0, 7.0}, c = {11.0, 13.0};
    TRCores cores({DenseTensor({1, 2, 1}, a), DenseTensor({1, 2, 1}, b),
                   DenseTensor({1, 2, 1}, c)});
    DenseTensor sub = trwopt::subchain(cores, 2);  // merges cores 3 then 1
    REQUIRE(sub.dims() == std::vector<std::size_t>{1, 4, 1});
    // Column order: i3 fastest, then i1.
    for (std::size_t i1 = 0; i1 < 2; ++i1)
        for (std::size_t i3 = 0; i3 < 2; ++i3)
            CHECK(sub.at({0, i3 + 2 * i1, 0}) == Catch::Approx(c[i3] * a[i1]));
}

TEST_CASE("three-core subchain matches the explicit two-factor oracle") {
    DenseTensor g1 = random_core(2, 3, 3, 81);
    DenseTensor g2 = random_core(3, 4, 4, 82);
    DenseTensor g3 = random_core(4, 2, 2, 83);
    TRCores cores({g1, g2, g3});
    DenseTensor sub = trwopt::subchain(cores, 2);  // (R3, I3*I1, R2)
    REQUIRE(sub.dims() == std::vector<std::size_t>{4, 2 * 3, 3});
    for (std::size_t r3 = 0; r3 < 4; ++r3)
        for (std::size_t i3 = 0; i3 < 2; ++i3)
            for (std::size_t i1 = 0; i1 < 3; ++i1)
                for (std::size_t r2 = 0; r2 < 3; ++r2) {
                    double want = 0.0;
                    for (std::size_t r1 = 0; r1 < 2; ++r1)
                        want += g3.at({r3, i3, r1}) * g1.at({r1, i1, r2});
                    CHECK(sub.at({r3, i3 + 2 * i1, r2}) ==
                          Catch::Approx(want).margin(1e-13));
                }
}

TEST_CASE("matricized product equals the circular unfolding of the trace reconstruction") {
    std::mt19937_64 rng(91);
    for (std::size_t n : {3u, 4u, 5u}) {
        std::vector<std::size_t> dims(n), ranks(n);
        for (auto& d : dims) d = 2 + rng() % 4;   // up to 5
        for (auto& r : ranks) r = 1 + rng() % 3;  // up to 3
        std::vector<DenseTensor> cs;
        for (std::size_t k = 0; k < n; ++k)
            cs.push_back(random_core(ranks[k], dims[k], ranks[(k + 1) % n], rng()));
        TRCores cores(cs);
        DenseTensor x = trwopt::reconstruct_full(cores);
        for (std::size_t mode = 1; mode <= n; ++mode) {
            Matrix lhs = trwopt::matricized_product(cores, mode);
            Matrix rhs = trwopt::unfold_shift(x, mode);
            REQUIRE(lhs.rows() == rhs.rows());
            REQUIRE(lhs.cols() == rhs.cols());
            double diff = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < lhs.size(); ++i) {
                diff += (lhs.values()[i] - rhs.values()[i]) * (lhs.values()[i] - rhs.values()[i]);
                scale += rhs.values()[i] * rhs.values()[i];
            }
            CHECK(std::sqrt(diff) <= 1e-12 * std::max(1.0, std::sqrt(scale)));
        }
    }
}

TEST_CASE("matricized product special cases") {
    // Rank-1 ring: outer product of the mode vector with the rest.
    std::vector<double> a = {2.0, 3.0}, b = {5.0, 7.0};
    TRCores r1({DenseTensor({1, 2, 1}, a), DenseTensor({1, 2, 1}, b)});
    Matrix m = trwopt::matricized_product(r1, 1);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(m(i, j) == Catch::Approx(a[i] * b[j]));

    // Identity slices, N=2: every entry is trace(I) = R.
    std::vector<double> eye = {1.0, 0.0, 0.0, 1.0};
    TRCores id({DenseTensor({2, 1, 2}, eye), DenseTensor({2, 1, 2}, eye)});
    Matrix mi = trwopt::matricized_product(id, 1);
    REQUIRE(mi.size() == 1);
    CHECK(mi(0, 0) == 2.0);
}

TEST_CASE("random initialization is deterministic and well scaled") {
    TRCores a = trwopt::init_random({4, 4}, {3, 3}, 7);
    TRCores b = trwopt::init_random({4, 4}, {3, 3}, 7);
    REQUIRE(a.order() == 2);
    CHECK(a.core(1).dims() == std::vector<std::size_t>{3, 4, 3});
    CHECK(a.core(2).dims() == std::vector<std::size_t>{3, 4, 3});
    for (std::size_t k = 1; k <= 2; ++k) CHECK(a.core(k).values() == b.core(k).values());

    TRCores c = trwopt::init_random({4, 4}, {3, 3}, 8);
    CHECK(a.core(1).values() != c.core(1).values());

    // Sample mean of ~3.6e5 entries should sit within 3 sigma of zero.
    TRCores big = trwopt::init_random({120, 120, 120}, {10, 10, 10}, 99);
    double sum = 0.0;
    for (std::size_t k = 1; k <= 3; ++k)
        for (double v : big.core(k).values()) sum += v;
    const double count = double(big.parameter_count());
    const double sigma_mean = (1.0 / std::sqrt(10.0)) / std::sqrt(count);
    CHECK(std::abs(sum / count) <= 3.0 * sigma_mean);
}

TEST_CASE("random initialization validates ranks") {
    CHECK_THROWS_AS(trwopt::init_random({4, 4}, {3}, 1), std::invalid_argument);
    CHECK_THROWS_AS(trwopt::init_random({4, 4}, {3, 0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(trwopt::init_random({4, 4, 4}, {2, 2, 2, 3}, 1), std::invalid_argument);
    CHECK_THROWS_AS(trwopt::init_random({4}, {2}, 1), std::invalid_argument);
    // Explicit closure accepted when consistent.
    TRCores ok = trwopt::init_random({4, 4, 4}, {2, 3, 2, 2}, 1);
    CHECK(ok.ranks() == std::vector<std::size_t>{2, 3, 2, 2});
}

TEST_CASE("storage grows linearly with the number of modes at fixed rank") {
    for (std::size_t n : {3u, 4u, 5u, 6u}) {
        std::vector<std::size_t> dims(n, 4), ranks(n, 2);
        TRCores cores = trwopt::init_random(dims, ranks, 3);
        CHECK(cores.parameter_count() == n * 2 * 4 * 2);
    }
}
