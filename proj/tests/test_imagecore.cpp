#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "augsearch/error.hpp"
#include "augsearch/image.hpp"
#include "augsearch/image_io.hpp"
#include "augsearch/rng.hpp"
#include "support.hpp"

using namespace augsearch;
namespace fs = std::filesystem;

namespace {

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an augsearch::Error";
  return ErrorKind::Parameter;
}

}  // namespace

TEST(Image, ShapeAndClamp) {
  Image img(3, 2, 3, std::vector<float>{-1.f, 2.f, 0.5f, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, std::nanf("")});
  EXPECT_EQ(img.sample_count(), 18u);
  EXPECT_EQ(img.at(0, 0, 0), 0.0f);
  EXPECT_EQ(img.at(0, 0, 1), 1.0f);
  EXPECT_EQ(img.at(0, 0, 2), 0.5f);
  EXPECT_EQ(img.at(2, 1, 2), 0.0f);
  EXPECT_THROW(Image(2, 2, 2), Error);
  EXPECT_THROW(Image(0, 2, 1), Error);
  EXPECT_THROW(Image(2, 2, 1, std::vector<float>(3)), Error);
}

TEST(Image, ClampIsIdempotent) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform(-3.0, 3.0);
    EXPECT_EQ(clamp01(clamp01(v)), clamp01(v));
    EXPECT_GE(clamp01(v), 0.0f);
    EXPECT_LE(clamp01(v), 1.0f);
  }
}

TEST(Image, ReflectIndexHasNoEdgeRepeat) {
  EXPECT_EQ(reflect_index(-1, 5), 1);
  EXPECT_EQ(reflect_index(-2, 5), 2);
  EXPECT_EQ(reflect_index(5, 5), 3);
  EXPECT_EQ(reflect_index(6, 5), 2);
  EXPECT_EQ(reflect_index(0, 1), 0);
  EXPECT_EQ(reflect_index(-7, 3), 1);
}

TEST(Rng, UniformDegenerateAndRange) {
  Rng rng(1);
  EXPECT_EQ(rng_uniform(rng, 2.0, 2.0), 2.0);
  EXPECT_THROW(rng_uniform(rng, 1.0, 0.0), Error);
  EXPECT_EQ(kind_of([&] { rng_uniform(rng, 1.0, 0.0); }), ErrorKind::Parameter);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform(-1.0, 3.0);
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 3.0);
  }
}

TEST(Rng, UniformMean) {
  Rng rng(20240601);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += rng_uniform(rng, 0.0, 3.0);
  EXPECT_NEAR(sum / 100000.0, 1.5, 0.03);
}

TEST(Rng, SameSeedSameDraws) {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform01(), b.uniform01());
}

TEST(Rng, SplitIsIndependentOfParentDraws) {
  Rng parent(5);
  Rng early = parent.split("child");
  for (int i = 0; i < 50; ++i) parent.next();
  Rng late = parent.split("child");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(early.next(), late.next());
  EXPECT_NE(parent.split("a").next(), parent.split("b").next());
  EXPECT_NE(parent.split(1).next(), parent.split(2).next());
}

TEST(Rng, BelowAndBernoulli) {
  Rng rng(7);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[rng.below(6)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
  EXPECT_THROW(rng.below(0), Error);
  int ones = 0;
  for (int i = 0; i < 20000; ++i) ones += rng.bernoulli(0.25);
  EXPECT_NEAR(ones / 20000.0, 0.25, 0.015);
  EXPECT_FALSE(rng.bernoulli(0.0));
  EXPECT_TRUE(rng.bernoulli(1.0));
  EXPECT_THROW(rng.bernoulli(1.5), Error);
}

TEST(Rng, NormalMoments) {
  Rng rng(11);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(ImageIo, LoadsGrayPgmNormalized) {
  test::TempDir dir;
  const auto path = dir.path() / "g.pgm";
  write_bytes(path, std::string("P5\n2 2\n255\n") + std::string{'\x00', '\x55', '\xaa', '\xff'});
  const auto img = load_image(path);
  ASSERT_EQ(img.channels(), 1);
  EXPECT_FLOAT_EQ(img.at(0, 0, 0), 0.0f);
  EXPECT_NEAR(img.at(1, 0, 0), 0.3333, 1e-4);
  EXPECT_NEAR(img.at(0, 1, 0), 0.6667, 1e-4);
  EXPECT_FLOAT_EQ(img.at(1, 1, 0), 1.0f);
}

TEST(ImageIo, HeaderCommentsAccepted) {
  test::TempDir dir;
  const auto path = dir.path() / "c.ppm";
  write_bytes(path, std::string("P6\n# made by hand\n1 1\n255\n") + std::string{'\x10', '\x20', '\x30'});
  const auto img = load_image(path);
  EXPECT_EQ(img.channels(), 3);
  EXPECT_NEAR(img.at(0, 0, 2), 48.0 / 255.0, 1e-7);
}

TEST(ImageIo, RoundTripWithinQuantization) {
  test::TempDir dir;
  Rng rng(2);
  for (int channels : {1, 3}) {
    const auto img = test::random_image(rng, 13, 7, channels);
    const auto path = dir.path() / (channels == 1 ? "r.pgm" : "r.ppm");
    save_image(img, path);
    const auto back = load_image(path);
    ASSERT_TRUE(back.same_shape(img));
    EXPECT_LE(max_abs_diff(img, back), 1.0 / 510.0 + 1e-7);
    save_image(back, path);
    EXPECT_EQ(load_image(path), back);  // load . save . load = load
  }
}

TEST(ImageIo, ChannelOrderAndBlack) {
  test::TempDir dir;
  Image img(4, 4, 3);
  img.at(1, 2, 0) = 1.0f;
  img.at(3, 3, 2) = 1.0f;
  save_image(img, dir.path() / "o.ppm");
  const auto back = load_image(dir.path() / "o.ppm");
  EXPECT_EQ(back, img);
  EXPECT_EQ(back.at(1, 2, 1), 0.0f);
}

TEST(ImageIo, ErrorVariants) {
  test::TempDir dir;
  EXPECT_EQ(kind_of([&] { load_image(dir.path() / "absent.ppm"); }), ErrorKind::MissingFile);
  write_bytes(dir.path() / "trunc.ppm", std::string("P6\n4 4\n255\n") + std::string(10, '\x01'));
  EXPECT_EQ(kind_of([&] { load_image(dir.path() / "trunc.ppm"); }), ErrorKind::MalformedHeader);
  write_bytes(dir.path() / "short.ppm", "P6\n4");
  EXPECT_EQ(kind_of([&] { load_image(dir.path() / "short.ppm"); }), ErrorKind::MalformedHeader);
  write_bytes(dir.path() / "deep.pgm", std::string("P5\n1 1\n65535\n") + std::string(2, '\x01'));
  EXPECT_EQ(kind_of([&] { load_image(dir.path() / "deep.pgm"); }), ErrorKind::UnsupportedBitDepth);
  write_bytes(dir.path() / "ascii.ppm", "P3\n1 1\n255\n1 2 3\n");
  EXPECT_EQ(kind_of([&] { load_image(dir.path() / "ascii.ppm"); }), ErrorKind::MalformedHeader);
  EXPECT_EQ(kind_of([&] { save_image(Image(2, 2, 1), dir.path() / "no" / "such" / "x.pgm"); }), ErrorKind::Io);
}
