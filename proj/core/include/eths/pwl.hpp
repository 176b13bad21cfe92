#pragma once

#include <vector>

namespace eths {

// Convex piecewise-linear function on a closed interval. Segments are stored as
// (length, slope) with strictly increasing slopes starting at x0 where f(x0)=v0.
class ConvexPwl {
public:
    struct Segment {
        double length;
        double slope;
    };

    ConvexPwl() = default;
    // Single point domain {x}.
    static ConvexPwl point(double x, double value);
    // Interpolates (xs[i], vs[i]); xs ascending, the data must be convex.
    static ConvexPwl from_points(const std::vector<double>& xs, const std::vector<double>& vs);

    bool empty() const { return empty_; }
    double lo() const { return x0_; }
    double hi() const;
    double at(double x) const;  // +inf outside the domain
    double right_slope(double x) const;
    double left_slope(double x) const;
    std::vector<double> breakpoints() const;  // includes both ends
    const std::vector<Segment>& segments() const { return segs_; }
    double start_value() const { return v0_; }

    // g(y) = f(-y)
    ConvexPwl reflected() const;
    // (a [] b)(s) = min_t a(t) + b(s-t)
    static ConvexPwl inf_convolution(const ConvexPwl& a, const ConvexPwl& b);
    ConvexPwl clipped(double lo, double hi) const;

private:
    void push(double length, double slope);

    double x0_ = 0.0;
    double v0_ = 0.0;
    bool empty_ = true;
    std::vector<Segment> segs_;
};

}  // namespace eths
