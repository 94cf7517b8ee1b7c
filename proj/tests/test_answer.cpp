#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <numeric>
#include <random>
#include <string>

#include "weakbench/answer.hpp"
#include "weakbench/error.hpp"

using namespace weakbench;
using namespace weakbench::answer;

namespace {

// Independent exact-rational oracle: reduction and comparison done from
// scratch on 128-bit integers, no CanonicalAnswer machinery involved.
struct OracleRational {
    __int128 num;
    __int128 den;

    static OracleRational make(int64_t n, int64_t d) {
        __int128 a = n, b = d;
        if (b < 0) {
            a = -a;
            b = -b;
        }
        __int128 x = a < 0 ? -a : a, y = b;
        while (y != 0) {
            __int128 t = x % y;
            x = y;
            y = t;
        }
        if (x > 1) {
            a /= x;
            b /= x;
        }
        return {a, b};
    }
    bool equals(const OracleRational& other) const {
        return num * other.den == other.num * den;
    }
};

// Decimal expansion of n/d when d = 2^i * 5^j, by long division.
std::string oracle_decimal(int64_t n, int64_t d) {
    bool neg = (n < 0) != (d < 0);
    uint64_t numer = n < 0 ? -(uint64_t)n : n;
    uint64_t denom = d < 0 ? -(uint64_t)d : d;
    std::string out = std::to_string(numer / denom);
    uint64_t rem = numer % denom;
    if (rem != 0) {
        out += ".";
        while (rem != 0) {
            rem *= 10;
            out += char('0' + rem / denom);
            rem %= denom;
        }
    }
    return (neg && (numer != 0) ? "-" : "") + out;
}

bool terminating(int64_t d) {
    d = d < 0 ? -d : d;
    for (int64_t p : {2LL, 5LL})
        while (d % p == 0) d /= p;
    return d == 1;
}

}  // namespace

TEST_CASE("extract: boxed expressions") {
    CHECK(extract_final_answer("... so \\boxed{42}.") == "42");
    CHECK(extract_final_answer("\\boxed{3} ... wait, \\boxed{5}") == "5");
    CHECK(extract_final_answer("nested \\boxed{\\frac{1}{2}} done") == "\\frac{1}{2}");
    CHECK(extract_final_answer("a \\boxed{  spaced  } b") == "spaced");
    CHECK_THROWS_AS(extract_final_answer("I cannot solve this."), ParseError);
}

TEST_CASE("extract: sentinel fallbacks") {
    CHECK(extract_final_answer("Therefore the answer is 12.") == "12");
    CHECK(extract_final_answer("Final answer: 3/4") == "3/4");
    CHECK(extract_final_answer("final ANSWER: x+1") == "x+1");
    CHECK(extract_final_answer("The answer is 5.\nBut wait, the answer is 6.") == "6");
    // boxed wins over a later sentinel
    CHECK(extract_final_answer("\\boxed{9}\nthe answer is 10") == "9");
    CHECK_THROWS_AS(extract_final_answer(""), ParseError);
    CHECK_THROWS_AS(extract_final_answer("The answer is   ."), ParseError);
}

TEST_CASE("normalize: integers") {
    auto a = normalize("42");
    CHECK(a.kind == AnswerKind::integer);
    CHECK(a.int_value == 42);
    CHECK(normalize("-7").int_value == -7);
    CHECK(normalize("+7").int_value == 7);
    CHECK(normalize("  42 ").int_value == 42);
    CHECK(normalize("{2}").int_value == 2);
    CHECK(normalize("$2$").int_value == 2);
    CHECK(normalize("1,234,567").int_value == 1234567);
    // not thousands-separated
    CHECK(normalize("12,34").kind == AnswerKind::symbolic_text);
}

TEST_CASE("normalize: fractions") {
    auto half = normalize("\\frac{1}{2}");
    CHECK(half.kind == AnswerKind::rational);
    CHECK(half.num == 1);
    CHECK(half.den == 2);
    auto reduced = normalize("\\frac{2}{4}");
    CHECK(reduced.num == 1);
    CHECK(reduced.den == 2);
    auto neg = normalize("3/-6");
    CHECK(neg.num == -1);
    CHECK(neg.den == 2);
    CHECK(normalize("\\dfrac{4}{2}").kind == AnswerKind::integer);
    CHECK(normalize("\\frac{1}{0}").kind == AnswerKind::symbolic_text);
    CHECK(normalize("a/b").kind == AnswerKind::symbolic_text);
}

TEST_CASE("normalize: decimals") {
    auto d = normalize("0.50");
    CHECK(d.kind == AnswerKind::decimal);
    CHECK(d.digits == "0.50");
    CHECK(d.num == 1);
    CHECK(d.den == 2);
    CHECK(normalize("-2.5").num == -5);
    CHECK(normalize(".25").num == 1);
    CHECK(normalize(".25").den == 4);
    CHECK(normalize("1.2.3").kind == AnswerKind::symbolic_text);
}

TEST_CASE("normalize: symbolic text") {
    auto s = normalize("x+1");
    CHECK(s.kind == AnswerKind::symbolic_text);
    CHECK(s.text == "x+1");
    CHECK(normalize("  x  +  1 ").text == "x + 1");
    CHECK(normalize("\\left( 1, 2 \\right)").text == "( 1, 2 )");
}

TEST_CASE("normalize is idempotent over re-rendered values") {
    for (const char* raw : {"42", "-3", "\\frac{3}{4}", "0.125", "x+1", "{2}", "2/3",
                            "\\sqrt{2}", "10,000", "0.50"}) {
        auto once = normalize(raw);
        auto twice = normalize(once.to_string());
        CHECK(equivalent(once, twice));
        CHECK(normalize(twice.to_string()).kind == twice.kind);
    }
}

TEST_CASE("equivalent: numeric cross-kind") {
    CHECK(equivalent(normalize("\\frac{1}{2}"), normalize("0.5")));
    CHECK(equivalent(normalize("2"), normalize("2")));
    CHECK(equivalent(normalize("2"), normalize("4/2")));
    CHECK(equivalent(normalize("2"), normalize("2.0")));
    CHECK_FALSE(equivalent(normalize("2"), normalize("3")));
    CHECK_FALSE(equivalent(normalize("1/3"), normalize("0.333")));
}

TEST_CASE("equivalent: symbolic is string equality, no CAS") {
    CHECK(equivalent(normalize("2x"), normalize("2x")));
    CHECK_FALSE(equivalent(normalize("2x"), normalize("x+x")));
    CHECK_FALSE(equivalent(normalize("2"), normalize("two")));
    CHECK_FALSE(equivalent(normalize("x"), normalize("2")));
}

TEST_CASE("equivalent: random rationals against the oracle") {
    std::mt19937_64 rng(20240817);
    for (int trial = 0; trial < 2000; ++trial) {
        int64_t a = int64_t(rng() % 2001) - 1000;
        int64_t b = int64_t(rng() % 1000) + 1;
        int64_t c = int64_t(rng() % 2001) - 1000;
        int64_t d = int64_t(rng() % 1000) + 1;
        auto lhs = normalize("\\frac{" + std::to_string(a) + "}{" + std::to_string(b) + "}");
        auto rhs = normalize(std::to_string(c) + "/" + std::to_string(d));
        bool expected = OracleRational::make(a, b).equals(OracleRational::make(c, d));
        CHECK(equivalent(lhs, rhs) == expected);
    }
}

TEST_CASE("equivalent: fraction vs exact decimal rendering, oracle-checked") {
    std::mt19937_64 rng(99);
    int run = 0;
    for (int trial = 0; trial < 5000 && run < 500; ++trial) {
        int64_t a = int64_t(rng() % 2001) - 1000;
        int64_t b = int64_t(rng() % 1000) + 1;
        if (!terminating(b)) continue;
        ++run;
        auto frac = normalize("\\frac{" + std::to_string(a) + "}{" + std::to_string(b) + "}");
        auto dec = normalize(oracle_decimal(a, b));
        CHECK(equivalent(frac, dec));
    }
    CHECK(run == 500);
}

TEST_CASE("equivalent is reflexive and symmetric over generated answers") {
    std::mt19937_64 rng(7);
    std::vector<CanonicalAnswer> pool;
    for (int i = 0; i < 60; ++i) {
        switch (rng() % 4) {
            case 0: pool.push_back(normalize(std::to_string(int64_t(rng() % 200) - 100))); break;
            case 1:
                pool.push_back(normalize(std::to_string(int64_t(rng() % 100) - 50) + "/" +
                                         std::to_string(rng() % 30 + 1)));
                break;
            case 2:
                pool.push_back(
                    normalize(std::to_string(rng() % 50) + "." + std::to_string(rng() % 100)));
                break;
            default:
                pool.push_back(normalize("expr" + std::to_string(rng() % 10) + "+x"));
        }
    }
    for (const auto& x : pool) CHECK(equivalent(x, x));
    for (const auto& x : pool)
        for (const auto& y : pool) CHECK(equivalent(x, y) == equivalent(y, x));
}

TEST_CASE("grade_attempt") {
    CHECK(grade_attempt("\\boxed{2}", "2") == GradeLabel::correct);
    CHECK(grade_attempt("\\boxed{3}", "2") == GradeLabel::wrong);
    CHECK(grade_attempt("no idea", "2") == GradeLabel::ungradable);
    CHECK(grade_attempt("the answer is 0.5", "\\frac{1}{2}") == GradeLabel::correct);
    CHECK_THROWS_AS(grade_attempt("\\boxed{2}", ""), ProtocolError);
}

TEST_CASE("grade_attempt never returns correct when extraction fails") {
    for (const char* raw : {"", "nothing here", "boxed{2} not really", "Final answer:   "}) {
        CHECK(grade_attempt(raw, "2") == GradeLabel::ungradable);
    }
}
