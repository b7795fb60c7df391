#include <doctest.h>

#include <cmath>

#include "explorium/rng.hpp"
#include "explorium/trajectory_memory.hpp"

using namespace explorium;

namespace {

Frame random_frame(Rng& rng, std::size_t h = 6, std::size_t w = 6) {
  Frame f(h, w);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  return f;
}

}  // namespace

TEST_CASE("kernel worked values") {
  Frame x(8, 8, 100);
  CHECK(frame_kernel(x, x, 50, 100) == 1.0);

  Frame small = x;
  for (std::size_t i = 0; i < small.size(); ++i) small.pixels[i] = static_cast<std::uint8_t>(100 + (i % 8));
  CHECK(frame_kernel(x, small, 50, 100) == 1.0);

  Frame ten = x;
  for (std::size_t i = 0; i < 10; ++i) ten.pixels[i * 3] = static_cast<std::uint8_t>(i % 2 ? 108 : 200);
  CHECK(frame_kernel(x, ten, 50, 100) == std::exp(-0.1));
  CHECK(std::abs(frame_kernel(x, ten, 50, 100) - 0.904837) < 1e-6);

  CHECK_THROWS_AS(frame_kernel(Frame(2, 2), Frame(2, 3), 50, 100), ConfigurationError);
}

TEST_CASE("kernel symmetry, bounds and monotonicity") {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto x = random_frame(rng), y = random_frame(rng);
    const double k = frame_kernel(x, y, 50, 100);
    CHECK(k == frame_kernel(y, x, 50, 100));
    CHECK(k <= 1.0);
    CHECK(k >= std::exp(-static_cast<double>(x.size()) / 100.0));

    auto z = y;
    const auto j = rng.below(z.size());
    // push pixel j further from x[j]
    z.pixels[j] = x.pixels[j] >= 128 ? 0 : 255;
    if (std::abs(int(z.pixels[j]) - int(x.pixels[j])) >= std::abs(int(y.pixels[j]) - int(x.pixels[j]))) {
      CHECK(frame_kernel(x, z, 50, 100) <= k);
    }
  }
}

TEST_CASE("visit frequency") {
  TrajectoryMemory mem;
  Frame s(4, 4, 30);
  CHECK(mem.visit_frequency(s) == 0.0);
  for (int i = 0; i < 20; ++i) mem.push(std::make_shared<const Frame>(s));
  CHECK(mem.visit_frequency(s) == 20.0);
}

TEST_CASE("memory is a FIFO of capacity d") {
  TrajectoryMemory mem(3);
  std::vector<FramePtr> pushed;
  for (int i = 0; i < 4; ++i) {
    pushed.push_back(std::make_shared<const Frame>(2, 2, static_cast<std::uint8_t>(i * 60)));
    mem.push(pushed.back());
    CHECK(mem.size() == std::min(i + 1, 3));
  }
  CHECK(mem.frames().front() == pushed[1]);
  for (const auto& f : mem.frames()) CHECK(f != pushed[0]);
  CHECK_THROWS_AS(TrajectoryMemory(0), ConfigurationError);
  CHECK_THROWS_AS(TrajectoryMemory(5, 0.0, 1.0), ConfigurationError);
}

TEST_CASE("pushing the query itself raises n_D") {
  Rng rng(2);
  TrajectoryMemory mem(20);
  for (int i = 0; i < 5; ++i) mem.push(std::make_shared<const Frame>(random_frame(rng)));
  const auto q = random_frame(rng);
  const double before = mem.visit_frequency(q);
  mem.push(std::make_shared<const Frame>(q));
  CHECK(mem.visit_frequency(q) > before);
  CHECK(mem.visit_frequency(q) <= static_cast<double>(mem.size()));
}
