#pragma once

// Straightforward reference computations used as test oracles. They share
// no code with the library.

#include <vector>

#include "flareforge/image.hpp"

namespace oracles {

struct Light {
  double depth;
  double theta;  // radians
};

// E_i / E_ref with E = I cos(theta) / d^2 and the reference light at the
// plain arithmetic mean depth with zero incidence.
std::vector<double> illumination_ratios(const std::vector<Light>& lights);

// Incident angle by similar triangles: the sensor half-width W/2 subtends
// half the field of view, so tan(theta) = (r / (W/2)) * tan(fov/2).
double incident_angle(double r, double width, double fov);

// Mean SSIM with a direct (non-separable) 2D Gaussian window, per channel,
// averaged over channels.
double ssim_bruteforce(const flareforge::Image& a, const flareforge::Image& b, int window = 11,
                       double sigma = 1.5);

// 10 log10(1 / MSE) with the MSE summed naively in long double.
double psnr(const flareforge::Image& a, const flareforge::Image& b);

}  // namespace oracles
