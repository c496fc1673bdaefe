#pragma once

// Design distributions, the ball-indicator truth and seeded RNG streams.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "voronoigram/asymptotics.hpp"
#include "voronoigram/geometry.hpp"

namespace voronoigram {

enum class SamplingModel { Uniform, LowTube, HighTube };

std::string model_name(SamplingModel model);
/// Accepts "uniform", "lowtube", "hightube" (also "low-tube", "high-tube").
SamplingModel parse_model(const std::string& name);

inline constexpr double kLowTubeDensity = 0.295;
inline constexpr double kHighTubeDensity = 1.2;

asymptotics::DensityDescriptor model_density(SamplingModel model);
/// Density value at a point of the unit square.
double density_at(SamplingModel model, const Point2& p);
/// Probability mass of the annulus 0.15 <= |x - (.5,.5)| <= 0.35.
double annulus_mass(SamplingModel model);

/// Seed for an independent stream keyed by (master, keys...), mixed through
/// splitmix64 so that neighbouring keys give unrelated streams.
std::uint64_t stream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

/// n i.i.d. draws: choose annulus or complement by mass, then sample that
/// region uniformly by rejection. Coordinates lie strictly inside (0,1).
std::vector<Point2> sample_design(SamplingModel model, std::size_t n, std::uint64_t seed);

/// The regression truth 1{|x - (1/2,1/2)| <= 1/4}.
inline constexpr double kBallRadius = 0.25;
double f0_indicator_ball(const Point2& x);
asymptotics::BallIndicator default_ball();

/// P(B((1/2,1/2), 1/4)) under the model's density.
double ball_probability(SamplingModel model);
/// sqrt(P (1 - P) / snr).
double noise_sigma(SamplingModel model, double snr);

/// Lebesgue measure of the intersection of a disc with an axis-aligned
/// rectangle, by adaptive quadrature of the chord overlap along x.
double disc_rectangle_area(double cx, double cy, double r, double x0, double x1, double y0,
                           double y1);

}  // namespace voronoigram
