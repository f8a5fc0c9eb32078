// Deterministic random number generation.
//
// All sampling goes through Rng, which wraps std::mt19937_64 (whose output
// sequence is fully pinned by the standard) and implements every
// distribution by hand. Library distributions (std::normal_distribution
// etc.) are implementation-defined and would break run reproducibility
// across toolchains, so they are not used anywhere.
//
// A run is keyed by one root seed. Independent purposes (instance
// generation, context draws, transitions, reward noise) get their own
// engines via substream_seed, so consuming extra draws in one stream never
// shifts another.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace certrl {

enum class Stream : std::uint64_t {
  instance = 1,           // environment parameters
  context_reward = 2,     // per-episode reward contexts
  context_transition = 3, // per-episode transition contexts
  transition = 4,         // successor-state draws
  reward = 5,             // reward noise
  aux = 6                 // scratch (tests, ad-hoc sampling)
};

// splitmix64 finalizer; decorrelates consecutive seed values.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t root, Stream stream) {
  return mix64(mix64(root) ^ mix64(static_cast<std::uint64_t>(stream)));
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Rng(std::uint64_t root, Stream stream) : engine_(substream_seed(root, stream)) {}

  // Uniform on [0, 1): top 53 bits of one engine output.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller. Two uniforms consumed per call; the
  // second variate is discarded to keep the per-call draw count fixed.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Gamma(alpha, 1) via Marsaglia-Tsang squeeze; alpha < 1 uses the
  // boosting identity Gamma(alpha) = Gamma(alpha + 1) * U^(1/alpha).
  double gamma(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("gamma: alpha must be > 0");
    if (alpha < 1.0) {
      double u = uniform01();
      while (u <= 0.0) u = uniform01();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Dirichlet(alpha) as normalized independent gammas. The normalization
  // is exact by construction up to rounding; callers that need rows
  // summing to 1 within tight tolerance get that here.
  std::vector<double> dirichlet(std::span<const double> alpha) {
    std::vector<double> g(alpha.size());
    for (int attempt = 0; attempt < 64; ++attempt) {
      double sum = 0.0;
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        g[i] = gamma(alpha[i]);
        sum += g[i];
      }
      // Tiny alphas can underflow every component to zero; redraw.
      if (sum > 0.0 && std::isfinite(sum)) {
        for (double& x : g) x /= sum;
        return g;
      }
    }
    throw std::runtime_error("dirichlet: degenerate draw (alpha too small)");
  }

  // Index draw from a probability row (sums to 1 within tolerance).
  // Rounding deficit resolves to the last index.
  int categorical(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("categorical: empty row");
    const double u = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  std::uint64_t raw() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

} // namespace certrl
