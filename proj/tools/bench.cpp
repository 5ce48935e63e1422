#include <chrono>
#include <cstdio>

#include "dsf/gradient.hpp"
#include "dsf/trajectories.hpp"

namespace {

using dsf::Matrix;

// Random ergodic generator with rates in (0.1, 1.1).
Matrix random_generator(Eigen::Index n, std::uint64_t seed) {
  dsf::Rng rng(seed);
  Matrix g(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      g(r, c) = 0.1 + rng.uniform();
      total += g(r, c);
    }
    g(c, c) = -total;
  }
  return g;
}

template <class Fn>
double time_s(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

int main() {
  const std::uint64_t seed = 12345;

  {
    const Matrix g = random_generator(6, seed);
    const std::int64_t paths = 200000;
    dsf::PathStats serial, parallel;
    const double ts = time_s([&] {
      serial = dsf::mc_transition_prob(g, 0, 1, 2.0, paths, seed,
                                       dsf::Exec::serial);
    });
    const double tp = time_s([&] {
      parallel = dsf::mc_transition_prob(g, 0, 1, 2.0, paths, seed,
                                         dsf::Exec::parallel);
    });
    const bool same = serial.estimate == parallel.estimate &&
                      serial.std_error == parallel.std_error;
    std::printf("path sampling   (%lld paths): serial %.3fs  parallel %.3fs  "
                "speedup %.2fx  identical %s\n",
                static_cast<long long>(paths), ts, tp, ts / tp,
                same ? "yes" : "NO");
    if (!same) return 1;
  }

  {
    const Matrix g = random_generator(48, seed + 1);
    std::vector<dsf::ObjectiveEntry> entries;
    dsf::Rng rng(seed + 2);
    for (std::size_t i = 0; i < 48; ++i)
      entries.push_back({i, (i + 1) % 48, rng.uniform()});
    const dsf::ObjectiveOperator gamma(48, entries);
    dsf::GradientTable serial, parallel;
    const double ts = time_s(
        [&] { serial = dsf::grad_system(gamma, g, dsf::Exec::serial); });
    const double tp = time_s(
        [&] { parallel = dsf::grad_system(gamma, g, dsf::Exec::parallel); });
    const bool same = (serial.values.array() == parallel.values.array()).all();
    std::printf("gradient sweep  (48 states):   serial %.3fs  parallel %.3fs  "
                "speedup %.2fx  identical %s\n",
                ts, tp, ts / tp, same ? "yes" : "NO");
    if (!same) return 1;
  }
  return 0;
}
