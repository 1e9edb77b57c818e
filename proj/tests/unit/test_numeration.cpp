#include "doctest.h"

#include <array>
#include <random>

#include "bvm/numeration.hpp"

using namespace bvm;

namespace {

std::shared_ptr<const BratteliDiagram> diagram(std::int64_t a, std::int64_t b, std::int64_t c,
                                               std::int64_t d) {
    return BratteliDiagram::stationary(IntMatrix::from_rows({{a, b}, {c, d}}));
}

}  // namespace

TEST_CASE("F and G sequences") {
    const FgSequences fg = fg_sequences(*diagram(1, 3, 1, 4), 3);
    CHECK(fg.f(0) == 1);
    CHECK(fg.f(1) == 4);
    CHECK(fg.f(2) == 19);
    CHECK(fg.f(3) == 91);
    CHECK(fg.g(0) == 1);
    CHECK(fg.g(1) == 5);
    CHECK(fg.g(2) == 24);
    CHECK(fg.g(3) == 115);

    // oracle: direct 2x2 matrix powers applied to (1,1)
    const FgSequences fg2 = fg_sequences(*diagram(2, 1, 3, 1), 8);
    std::array<BigInt, 4> m{1, 0, 0, 1};  // running M^n
    for (std::size_t n = 0; n <= 8; ++n) {
        CHECK(fg2.f(n) == m[0] + m[1]);
        CHECK(fg2.g(n) == m[2] + m[3]);
        m = {2 * m[0] + 1 * m[2], 2 * m[1] + 1 * m[3], 3 * m[0] + 1 * m[2], 3 * m[1] + 1 * m[3]};
    }

    // Fibonacci: G_n = F_{n-1}
    const FgSequences fgf = fg_sequences(*diagram(1, 1, 1, 0), 8);
    CHECK(fgf.f(4) == 8);
    for (std::size_t n = 1; n <= 8; ++n) CHECK(fgf.g(n) == fgf.f(n - 1));
}

TEST_CASE("stationary recursion and matrix powers agree") {
    for (auto d : {diagram(1, 3, 1, 4), diagram(2, 1, 3, 1), diagram(1, 1, 1, 0),
                   diagram(3, 1, 1, 2)}) {
        const std::int64_t tr = d->a() + d->d();
        const std::int64_t det = d->a() * d->d() - d->b() * d->c();
        const FgSequences fg = fg_sequences(*d, 12);
        for (std::size_t n = 1; n < 12; ++n) {
            CHECK(fg.f(n + 1) == tr * fg.f(n) - det * fg.f(n - 1));
            CHECK(fg.g(n + 1) == tr * fg.g(n) - det * fg.g(n - 1));
        }
    }
}

TEST_CASE("level-dependent coefficients satisfy the rational recursion") {
    auto d = BratteliDiagram::from_levels({IntMatrix::from_rows({{1, 3}, {1, 4}}),
                                           IntMatrix::from_rows({{2, 1}, {3, 1}}),
                                           IntMatrix::from_rows({{1, 2}, {2, 1}})});
    const FgSequences fg = fg_sequences(*d, 10);
    for (std::size_t n = 1; n < 10; ++n) {
        const int lv = static_cast<int>(n);
        const Rational an(d->a(lv)), bn(d->b(lv)), cn(d->c(lv)), dn(d->d(lv));
        const Rational an1(d->a(lv + 1)), bn1(d->b(lv + 1));
        const Rational cn1(d->c(lv + 1)), dn1(d->d(lv + 1));
        // F eliminates G through the b column; G eliminates F through c.
        const Rational rhs_f = (an1 + bn1 / bn * dn) * Rational(fg.f(n)) -
                               (bn1 / bn * an * dn - bn1 * cn) * Rational(fg.f(n - 1));
        CHECK(Rational(fg.f(n + 1)) == rhs_f);
        const Rational rhs_g = (dn1 + cn1 / cn * an) * Rational(fg.g(n)) -
                               (cn1 / cn * an * dn - cn1 * bn) * Rational(fg.g(n - 1));
        CHECK(Rational(fg.g(n + 1)) == rhs_g);
    }
}

TEST_CASE("digit extraction on the worked paths") {
    auto d = diagram(1, 3, 1, 4);
    const PathState x = path_at_index(d, 65);
    const DigitString dx = path_digits(x);
    REQUIRE(dx.size() == 3);
    CHECK(dx.pairs[0] == DigitPair{1, 2, 2, 2});
    CHECK(dx.pairs[1] == DigitPair{1, 3, 2, 2});
    CHECK(dx.pairs[2] == DigitPair{1, 1, 2, 1});

    const DigitString dy = path_digits(path_at_index(d, 69));
    REQUIRE(dy.size() == 3);
    CHECK(dy.pairs[0].f_digit == 1);
    CHECK(dy.pairs[0].g_digit == 1);
    CHECK(dy.pairs[1].f_digit == 0);
    CHECK(dy.pairs[1].g_digit == 0);
    CHECK(dy.pairs[2].f_digit == 1);
    CHECK(dy.pairs[2].g_digit == 2);

    CHECK(path_digits(PathState::minimal(d)).empty());
}

TEST_CASE("decode on the worked digit strings") {
    auto d = diagram(1, 3, 1, 4);
    const auto x = annotate_digits(*d, {{1, 2}, {1, 3}, {1, 1}});
    REQUIRE(x.has_value());
    CHECK(decode(*x, *d) == 65);
    const auto y = annotate_digits(*d, {{1, 1}, {0, 0}, {1, 2}});
    REQUIRE(y.has_value());
    CHECK(decode(*y, *d) == 69);
    CHECK(decode(DigitString{}, *d) == 0);
}

TEST_CASE("encode agrees with the dynamical oracle") {
    auto d = diagram(1, 3, 1, 4);
    CHECK(encode(65, d).bare() ==
          std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 2}, {1, 3}, {1, 1}});
    CHECK(encode(4, d).bare() ==
          std::vector<std::pair<std::int64_t, std::int64_t>>{{0, 0}, {1, 0}});
    auto d2 = diagram(2, 1, 3, 1);
    CHECK(encode(85, d2).bare() ==
          std::vector<std::pair<std::int64_t, std::int64_t>>{{3, 0}, {2, 0}, {1, 0}, {2, 0}});
    CHECK(decode(encode(85, d2), *d2) == 85);

    // oracle: n-fold successor then digit extraction
    for (auto dd : {d, d2, diagram(1, 1, 1, 0)}) {
        PathState x = PathState::minimal(dd);
        for (int n = 0; n < 600; ++n) {
            CHECK(encode(BigInt(n), dd) == path_digits(x));
            x = successor(x);
        }
    }
}

TEST_CASE("decode-encode round trip on random big integers") {
    std::mt19937_64 rng(13);
    for (auto d : {diagram(1, 3, 1, 4), diagram(2, 1, 3, 1), diagram(1, 1, 1, 0)}) {
        for (int i = 0; i < 60; ++i) {
            BigInt n = 0;
            const int words = 1 + static_cast<int>(rng() % 4);
            for (int w = 0; w < words; ++w) n = (n << 61) + static_cast<std::uint64_t>(rng() >> 3);
            const DigitString ds = encode(n, d);
            CHECK(validate_digits(*d, ds));
            CHECK(decode(ds, *d) == n);
            // the annotation of the bare pairs is unique and identical
            const auto re = annotate_digits(*d, ds.bare());
            REQUIRE(re.has_value());
            CHECK(*re == ds);
        }
    }
}

TEST_CASE("successor adds one to the decoded value") {
    for (auto d : {diagram(1, 3, 1, 4), diagram(1, 1, 1, 0)}) {
        PathState x = path_at_index(d, 12345);
        for (int i = 0; i < 100; ++i) {
            const BigInt n = decode(path_digits(x), *d);
            x = successor(x);
            CHECK(decode(path_digits(x), *d) == n + 1);
        }
    }
}

TEST_CASE("digit validation rejects out-of-range and broken chains") {
    auto d = diagram(2, 1, 3, 1);
    CHECK(validate_digits(*d, {{1, 0}}));
    CHECK_FALSE(validate_digits(*d, {{2, 1}, {0, 0}}));  // gamma = b out of range
    CHECK_FALSE(validate_digits(*d, {{4, 0}}));          // delta beyond both a and c
    CHECK_FALSE(validate_digits(*d, {{0, 2}}));          // gamma without the matching delta

    // b = 1 forbids consecutive full digits (the Fibonacci carry rule)
    auto f = diagram(1, 1, 1, 0);
    CHECK(validate_digits(*f, {{1, 0}, {0, 0}, {1, 0}}));
    CHECK_FALSE(validate_digits(*f, {{1, 0}, {1, 0}}));
    CHECK(validate_digits(*f, {{1, 0}, {0, 0}}));  // redundant zero pair is fine

    // the last pair must be able to close on the minimal path's vertex:
    // (3,0) alone ends at vertex 2
    CHECK_FALSE(validate_digits(*d, {{3, 0}}));
    CHECK(validate_digits(*d, {{3, 0}, {2, 0}}));
}

TEST_CASE("digit parser") {
    CHECK(parse_digit_pairs("((1,2),(1,3),(1,1))") ==
          std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 2}, {1, 3}, {1, 1}});
    CHECK(parse_digit_pairs("(1,2)") ==
          std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 2}});
    CHECK(parse_digit_pairs("[[1,0],[0,0]]") ==
          std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 0}, {0, 0}});
    CHECK(parse_digit_pairs("()").empty());
    CHECK_THROWS(parse_digit_pairs("((1,2,3))"));
    CHECK_THROWS(parse_digit_pairs("((1,2)"));
}

TEST_CASE("digits reconstruct the path") {
    auto d = diagram(1, 3, 1, 4);
    for (const BigInt n : {BigInt(0), BigInt(65), BigInt(69), BigInt(12345)}) {
        const PathState x = path_at_index(d, n);
        CHECK(digits_to_path(d, path_digits(x)) == x);
    }
}
