#pragma once
#include <functional>

#include "curveflow/curve.hpp"

namespace curveflow::seeds {

// Upper half of a circle, left to right, uniform in angle.
SampledCurve semicircle(int n, double radius = 1.0, double cx = 0.0);

// Circular cap meeting the x-axis at contact angle alpha, centred at x = 0.
// radial(sigma) multiplies the radius; it must equal 1 with zero slope at both ends.
SampledCurve cap(double alpha, int n, double radius = 1.0,
                 const std::function<double(double)>& radial = {});

// Cap with radius factor 1 + bump * sin^2(pi sigma).
SampledCurve bumped_cap(double alpha, int n, double bump, double radius = 1.0);

SampledCurve segment(const Point& a, const Point& b, int n);

// Arc of x = a cos t, y = b sin t for t in [t0, t1].
SampledCurve ellipse_arc(double a, double b, double t0, double t1, int n);

// Densely sampled polyline through the given corners, uniform in chord length.
SampledCurve polyline(const std::vector<Point>& corners, int n);

// Unit-radius cap at alpha with a small clockwise loop of radius r spliced in at
// fraction pos of the cap; the loop shrinks under the flow.
SampledCurve looped_cap(double alpha, double r, double pos, int n);

}  // namespace curveflow::seeds
