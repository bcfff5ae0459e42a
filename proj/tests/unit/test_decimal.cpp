#include <doctest.h>

#include <random>

#include "tqa/decimal.hpp"
#include "tqa/error.hpp"

using tqa::Decimal;

TEST_SUITE("decimal") {
  TEST_CASE("parse and print") {
    CHECK(Decimal::parse("530").to_string() == "530");
    CHECK(Decimal::parse("-0012.500").to_string() == "-12.5");
    CHECK(Decimal::parse("+0.0").to_string() == "0");
    CHECK(Decimal::parse("-0").to_string() == "0");
    CHECK(Decimal::parse("0.000001").to_string() == "0.000001");
    CHECK(Decimal::parse("123456789012345678901234567890").to_string() == "123456789012345678901234567890");
  }

  TEST_CASE("rejects non-numeric text") {
    for (const char* bad : {"", "-", ".", "1.", ".5", "1,000", "1e3", "12a", " 1", "--1"}) {
      CAPTURE(bad);
      CHECK_THROWS_WITH_AS(Decimal::parse(bad), doctest::Contains("NotNumeric"), tqa::Error);
    }
  }

  TEST_CASE("normalized representation makes equality structural") {
    CHECK(Decimal::parse("1.50") == Decimal::parse("1.5"));
    CHECK(Decimal::parse("1.5").scale() == 1);
    CHECK(Decimal::parse("100").scale() == 0);
    CHECK(Decimal(Decimal::Int(1500), 3) == Decimal::parse("1.5"));
  }

  TEST_CASE("multiplication is exact") {
    CHECK((Decimal::parse("1234.5") * Decimal(1000)).to_string() == "1234500");
    CHECK((Decimal::parse("0.1") * Decimal::parse("0.2")).to_string() == "0.02");
    CHECK((-Decimal::parse("45") * Decimal(1000000)).to_string() == "-45000000");
  }

  TEST_CASE("ordering") {
    CHECK(Decimal::parse("1.25") < Decimal::parse("1.3"));
    CHECK(Decimal::parse("-2") < Decimal::parse("-1.5"));
    CHECK(Decimal::parse("10") > Decimal::parse("9.99"));
    CHECK_FALSE(Decimal::parse("1.0") < Decimal::parse("1"));
  }

  TEST_CASE("random round trip") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 2000; ++i) {
      std::string s = std::to_string(1 + rng() % 1'000'000'000);
      const std::size_t frac = rng() % 8;
      if (frac > 0) {
        std::string f;
        for (std::size_t k = 0; k < frac; ++k) f.push_back(static_cast<char>('0' + rng() % 10));
        while (!f.empty() && f.back() == '0') f.pop_back();
        if (!f.empty()) s += "." + f;
      }
      if (rng() % 2) s = "-" + s;
      CHECK(Decimal::parse(s).to_string() == s);
    }
  }
}
