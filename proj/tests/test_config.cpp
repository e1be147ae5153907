#include <gtest/gtest.h>

#include <functional>

#include "bstab/config.hpp"

using namespace bstab;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ConfigFile, ParsesSectionsAndTypes) {
  const ConfigFile c = ConfigFile::parse(
      "# top\n[a]\nx = 1.5 ; trailing\nn = 7\nflag = yes\nlist = 1, 2,3\nz = 1+2i, -3i\nname = heat\n[b]\n");
  EXPECT_EQ(c.get_double("a", "x", 0.0), 1.5);
  EXPECT_EQ(c.get_int("a", "n", 0), 7);
  EXPECT_TRUE(c.get_bool("a", "flag", false));
  EXPECT_EQ(c.get_doubles("a", "list", {}), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(c.get_complexes("a", "z"), (std::vector<Complex>{{1, 2}, {0, -3}}));
  EXPECT_EQ(c.get_string("a", "name", ""), "heat");
  EXPECT_EQ(c.get_double("a", "missing", 4.0), 4.0);
  EXPECT_TRUE(c.has_section("b"));
  EXPECT_FALSE(c.has("b", "x"));
}

TEST(ConfigFile, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of([] { ConfigFile::parse("[a]\nx 1\n", "c.ini"); }).find("c.ini:2"), std::string::npos);
  EXPECT_NE(error_of([] { ConfigFile::parse("x = 1\n", "c.ini"); }).find("c.ini:1"), std::string::npos);
  EXPECT_NE(error_of([] { ConfigFile::parse("[a]\nx = 1\nx = 2\n", "c.ini"); }).find("c.ini:3"), std::string::npos);
  EXPECT_NE(error_of([] { ConfigFile::parse("[a]\n[a]\n", "c.ini"); }).find("c.ini:2"), std::string::npos);
  EXPECT_NE(error_of([] { ConfigFile::parse("[a\n", "c.ini"); }).find("c.ini:1"), std::string::npos);

  const ConfigFile c = ConfigFile::parse("[a]\n\nx = abc\nn = 1.5\nb = maybe\nz = 1+\n", "c.ini");
  EXPECT_NE(error_of([&] { (void)c.get_double("a", "x", 0.0); }).find("c.ini:3"), std::string::npos);
  EXPECT_NE(error_of([&] { (void)c.get_int("a", "n", 0); }).find("c.ini:4"), std::string::npos);
  EXPECT_NE(error_of([&] { (void)c.get_bool("a", "b", false); }).find("c.ini:5"), std::string::npos);
  EXPECT_NE(error_of([&] { (void)c.get_complexes("a", "z"); }).find("c.ini:6"), std::string::npos);
}

TEST(ConfigFile, UnknownKeysAndSectionsAreRejected) {
  const ConfigFile c = ConfigFile::parse("[a]\nx = 1\ntypo = 2\n[zz]\n", "c.ini");
  EXPECT_NE(error_of([&] { c.check_keys("a", {"x"}); }).find("c.ini:3"), std::string::npos);
  EXPECT_NE(error_of([&] { c.check_sections({"a"}); }).find("c.ini:4"), std::string::npos);
  EXPECT_NO_THROW(c.check_keys("a", {"x", "typo"}));
  EXPECT_THROW(ConfigFile::load("/nonexistent/file.ini"), ConfigError);
}
