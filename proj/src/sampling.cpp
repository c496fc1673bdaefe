#include "voronoigram/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "voronoigram/errors.hpp"
#include "voronoigram/quadrature.hpp"

namespace voronoigram {
namespace {

constexpr double kCenter = 0.5;
constexpr double kInner = 0.15;
constexpr double kOuter = 0.35;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool in_annulus(const Point2& p) {
  const double r2 = (p.x - kCenter) * (p.x - kCenter) + (p.y - kCenter) * (p.y - kCenter);
  return r2 >= kInner * kInner && r2 <= kOuter * kOuter;
}

// Uniform on the open interval (lo, hi).
double open_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  double v = u(rng);
  while (v <= lo) v = u(rng);
  return v;
}

}  // namespace

std::string model_name(SamplingModel model) {
  switch (model) {
    case SamplingModel::Uniform: return "uniform";
    case SamplingModel::LowTube: return "lowtube";
    case SamplingModel::HighTube: return "hightube";
  }
  return "unknown";
}

SamplingModel parse_model(const std::string& name) {
  if (name == "uniform") return SamplingModel::Uniform;
  if (name == "lowtube" || name == "low-tube") return SamplingModel::LowTube;
  if (name == "hightube" || name == "high-tube") return SamplingModel::HighTube;
  throw BadConfig("unknown sampling model '" + name + "'");
}

asymptotics::DensityDescriptor model_density(SamplingModel model) {
  switch (model) {
    case SamplingModel::Uniform: return asymptotics::UniformDensity{};
    case SamplingModel::LowTube:
      return asymptotics::AnnulusDensity{kCenter, kCenter, kInner, kOuter, kLowTubeDensity};
    case SamplingModel::HighTube:
      return asymptotics::AnnulusDensity{kCenter, kCenter, kInner, kOuter, kHighTubeDensity};
  }
  return asymptotics::UniformDensity{};
}

double density_at(SamplingModel model, const Point2& p) {
  const auto d = model_density(model);
  if (const auto* a = std::get_if<asymptotics::AnnulusDensity>(&d)) return (*a)(p.x, p.y);
  return 1.0;
}

double annulus_mass(SamplingModel model) {
  const double area = std::numbers::pi * (kOuter * kOuter - kInner * kInner);
  switch (model) {
    case SamplingModel::Uniform: return area;
    case SamplingModel::LowTube: return kLowTubeDensity * area;
    case SamplingModel::HighTube: return kHighTubeDensity * area;
  }
  return area;
}

std::uint64_t stream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  for (const std::uint64_t k : keys) {
    state ^= out + k;
    out = splitmix64(state);
  }
  return out;
}

std::vector<Point2> sample_design(SamplingModel model, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point2> out;
  out.reserve(n);
  if (model == SamplingModel::Uniform) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = open_uniform(rng, 0.0, 1.0);
      out.push_back({x, open_uniform(rng, 0.0, 1.0)});
    }
    return out;
  }
  const double mass = annulus_mass(model);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool inside = coin(rng) < mass;
    Point2 p;
    do {
      if (inside) {
        p.x = open_uniform(rng, kCenter - kOuter, kCenter + kOuter);
        p.y = open_uniform(rng, kCenter - kOuter, kCenter + kOuter);
      } else {
        p.x = open_uniform(rng, 0.0, 1.0);
        p.y = open_uniform(rng, 0.0, 1.0);
      }
    } while (in_annulus(p) != inside);
    out.push_back(p);
  }
  return out;
}

double f0_indicator_ball(const Point2& x) {
  const double dx = x.x - kCenter;
  const double dy = x.y - kCenter;
  return dx * dx + dy * dy <= kBallRadius * kBallRadius ? 1.0 : 0.0;
}

asymptotics::BallIndicator default_ball() { return {{kCenter, kCenter}, kBallRadius}; }

double ball_probability(SamplingModel model) {
  const double pi = std::numbers::pi;
  if (model == SamplingModel::Uniform) return pi * kBallRadius * kBallRadius;
  const double p_in = model == SamplingModel::LowTube ? kLowTubeDensity : kHighTubeDensity;
  const asymptotics::AnnulusDensity a{kCenter, kCenter, kInner, kOuter, p_in};
  return p_in * pi * (kBallRadius * kBallRadius - kInner * kInner) +
         a.p_out() * pi * kInner * kInner;
}

double noise_sigma(SamplingModel model, double snr) {
  if (!(snr > 0.0)) throw BadConfig("snr must be positive");
  const double p = ball_probability(model);
  return std::sqrt(p * (1.0 - p) / snr);
}

double disc_rectangle_area(double cx, double cy, double r, double x0, double x1, double y0,
                           double y1) {
  const double lo = std::max(x0, cx - r);
  const double hi = std::min(x1, cx + r);
  if (!(lo < hi) || !(y0 < y1)) return 0.0;
  auto overlap = [&](double x) {
    const double h = std::sqrt(std::max(0.0, r * r - (x - cx) * (x - cx)));
    return std::max(0.0, std::min(y1, cy + h) - std::max(y0, cy - h));
  };
  // Split at the kinks where the chord crosses y0 or y1.
  std::vector<double> cuts{lo, hi};
  for (const double yb : {y0, y1}) {
    const double dy = yb - cy;
    if (std::abs(dy) < r) {
      const double dx = std::sqrt(r * r - dy * dy);
      for (const double xk : {cx - dx, cx + dx})
        if (xk > lo && xk < hi) cuts.push_back(xk);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] > cuts[k]) area += quad::integrate(overlap, cuts[k], cuts[k + 1], 1e-13, 1e-17).value;
  }
  return area;
}

}  // namespace voronoigram
