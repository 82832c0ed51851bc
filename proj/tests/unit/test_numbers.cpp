#include <gtest/gtest.h>

#include "limra/numbers.hpp"

namespace limra::numbers {
namespace {

double scalar(std::string_view text) {
  const auto p = parse(text);
  EXPECT_TRUE(p.has_value()) << text;
  if (!p || p->atoms.empty()) return -1;
  return p->atoms.front().value;
}

TEST(Parse, Digits) {
  EXPECT_EQ(scalar("2,000"), 2000);
  EXPECT_EQ(scalar("2000"), 2000);
  EXPECT_EQ(scalar("3.5"), 3.5);
  EXPECT_EQ(scalar("1,234,567"), 1234567);
  EXPECT_TRUE(parse("2,000")->atoms[0].digit_grouping);
  EXPECT_TRUE(parse("2,000")->atoms[0].from_digits);
}

TEST(Parse, Words) {
  EXPECT_EQ(scalar("twenty-five"), 25);
  EXPECT_EQ(scalar("one hundred"), 100);
  EXPECT_EQ(scalar("one hundred and fifty-four"), 154);
  EXPECT_EQ(scalar("two thousand"), 2000);
  EXPECT_EQ(scalar("one million"), 1e6);
}

TEST(Parse, Ordinals) {
  const auto a = parse("3rd");
  ASSERT_TRUE(a);
  EXPECT_TRUE(a->atoms[0].ordinal);
  EXPECT_EQ(a->atoms[0].value, 3);
  const auto b = parse("twenty-second");
  ASSERT_TRUE(b);
  EXPECT_TRUE(b->atoms[0].ordinal);
  EXPECT_EQ(b->atoms[0].value, 22);
}

TEST(Parse, Dates) {
  const auto d = parse("22 June 1990");
  ASSERT_TRUE(d);
  ASSERT_EQ(d->atoms.size(), 1u);
  EXPECT_EQ(d->atoms[0].kind, NumberAtom::Kind::kDate);
  EXPECT_EQ(d->atoms[0].day, 22);
  EXPECT_EQ(d->atoms[0].month, 6);
  EXPECT_EQ(d->atoms[0].year, 1990);
  EXPECT_TRUE(parse("22 June 1990")->same_value(*parse("June 22, 1990")));
  EXPECT_TRUE(parse("June 1990")->same_value(*parse("june nineteen ninety")));
}

TEST(Parse, NoNumber) {
  EXPECT_FALSE(parse("no numbers here").has_value());
  EXPECT_FALSE(parse("").has_value());
}

TEST(SameValue, ResidualWordsMatter) {
  EXPECT_TRUE(parse("18 years")->same_value(*parse("eighteen years")));
  EXPECT_FALSE(parse("18 years")->same_value(*parse("18 days")));
  EXPECT_TRUE(parse("2,000 ft")->same_value(*parse("2000 ft")));
  EXPECT_FALSE(parse("100")->same_value(*parse("101")));
  EXPECT_TRUE(parse("50%")->same_value(*parse("fifty percent")));
}

TEST(Words, Cardinals) {
  EXPECT_EQ(cardinal_words(0), "zero");
  EXPECT_EQ(cardinal_words(25), "twenty-five");
  EXPECT_EQ(cardinal_words(154), "one hundred fifty-four");
  EXPECT_EQ(cardinal_words(2000), "two thousand");
  EXPECT_EQ(cardinal_words(1000000), "one million");
  EXPECT_THROW(cardinal_words(-1), std::out_of_range);
  EXPECT_THROW(cardinal_words(1000001), std::out_of_range);
}

TEST(Words, Ordinals) {
  EXPECT_EQ(ordinal_words(1), "first");
  EXPECT_EQ(ordinal_words(22), "twenty-second");
  EXPECT_EQ(ordinal_words(100), "one hundredth");
  EXPECT_EQ(ordinal_digits(1), "1st");
  EXPECT_EQ(ordinal_digits(12), "12th");
  EXPECT_EQ(ordinal_digits(22), "22nd");
  EXPECT_EQ(ordinal_digits(113), "113th");
  EXPECT_EQ(ordinal_digits(103), "103rd");
}

TEST(Words, FormatInteger) {
  EXPECT_EQ(format_integer(2000, true), "2,000");
  EXPECT_EQ(format_integer(2000, false), "2000");
  EXPECT_EQ(format_integer(1234567, true), "1,234,567");
  EXPECT_EQ(format_integer(999, true), "999");
  EXPECT_EQ(format_integer(-1200, true), "-1,200");
}

TEST(Words, RoundTripThroughParser) {
  for (std::int64_t n = 0; n <= 1000000; n += (n < 2000 ? 1 : 997)) {
    const auto p = parse(cardinal_words(n));
    ASSERT_TRUE(p) << n;
    ASSERT_EQ(p->atoms.size(), 1u) << cardinal_words(n);
    EXPECT_EQ(p->atoms[0].value, static_cast<double>(n)) << cardinal_words(n);
    if (n >= 1) {
      const auto o = parse(ordinal_words(n));
      ASSERT_TRUE(o) << ordinal_words(n);
      EXPECT_EQ(o->atoms[0].value, static_cast<double>(n)) << ordinal_words(n);
      EXPECT_TRUE(o->atoms[0].ordinal);
      EXPECT_TRUE(parse(ordinal_digits(n))->same_value(*o)) << ordinal_digits(n);
    }
  }
}

TEST(NormalizeSurface, Basics) {
  EXPECT_EQ(normalize_surface("  Marie   LOUISE. "), "marie louise");
  EXPECT_EQ(month_name(6), "June");
}

}  // namespace
}  // namespace limra::numbers
