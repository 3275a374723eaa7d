#pragma once

#include <cstdint>
#include <vector>

namespace ccl::geometry {

/// One sampled edge-node geometry: sorted distances from the origin of a
/// homogeneous planar Poisson field restricted to a disc window.
struct PPPRealization {
  double density_lambda = 1.0;
  double window_radius = 1.0;
  std::vector<double> distances;  // ascending radii in [0, window_radius]
  std::uint64_t seed = 0;
};

/// Draws N ~ Poisson(lambda * pi * radius^2) points uniformly on the disc and
/// returns their sorted distances. Fully determined by the seed.
PPPRealization sample_ppp(double lambda, double radius, std::uint64_t seed);

/// Density of the n-th nearest distance: 2 (pi L)^n v^{2n-1} e^{-pi L v^2} / (n-1)!
double nth_distance_pdf(int n, double lambda, double v);

/// Joint density of the l-th and n-th nearest distances (l < n); zero for u > v.
double joint_distance_pdf(int l, int n, double lambda, double u, double v);

/// Conditional density of the l-th nearest distance given the k-th (l < k).
/// Independent of the density; zero for u > v.
double conditional_distance_pdf(int l, int k, double u, double v);

/// Conditional distribution function: integral of the conditional density
/// over [0, y]. Equals 1 at y = v.
double conditional_distance_cdf(int l, int k, double y, double v);

/// Smallest disc radius such that the window holds at least `min_points`
/// points except with probability below `tail_prob`.
double min_window_radius(double lambda, int min_points, double tail_prob);

}  // namespace ccl::geometry
