#include "eths/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eths {

namespace {
constexpr double kInfv = std::numeric_limits<double>::infinity();
constexpr double kDomTol = 1e-9;
constexpr double kLenTol = 1e-13;

bool same_slope(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a)); }
}  // namespace

ConvexPwl ConvexPwl::point(double x, double value) {
    ConvexPwl f;
    f.x0_ = x;
    f.v0_ = value;
    f.empty_ = false;
    return f;
}

ConvexPwl ConvexPwl::from_points(const std::vector<double>& xs, const std::vector<double>& vs) {
    ConvexPwl f = point(xs.front(), vs.front());
    for (std::size_t i = 1; i < xs.size(); ++i) {
        double len = xs[i] - xs[i - 1];
        if (len <= kLenTol) continue;
        f.push(len, (vs[i] - vs[i - 1]) / len);
    }
    return f;
}

void ConvexPwl::push(double length, double slope) {
    if (length <= kLenTol) return;
    if (!segs_.empty() && (same_slope(segs_.back().slope, slope) || slope < segs_.back().slope)) {
        // rounding can make a convex input look slightly concave; keep end values
        Segment& b = segs_.back();
        double total = b.length + length;
        b.slope = (b.slope * b.length + slope * length) / total;
        b.length = total;
        return;
    }
    segs_.push_back({length, slope});
}

double ConvexPwl::hi() const {
    double x = x0_;
    for (const auto& s : segs_) x += s.length;
    return x;
}

double ConvexPwl::at(double x) const {
    if (empty_ || x < x0_ - kDomTol) return kInfv;
    double cx = x0_, v = v0_;
    if (x <= x0_) return v0_;
    for (const auto& s : segs_) {
        if (x <= cx + s.length) return v + s.slope * (x - cx);
        cx += s.length;
        v += s.slope * s.length;
    }
    return x <= cx + kDomTol ? v : kInfv;
}

double ConvexPwl::right_slope(double x) const {
    double cx = x0_;
    for (const auto& s : segs_) {
        if (x < cx + s.length - kDomTol) return s.slope;
        cx += s.length;
    }
    return kInfv;
}

double ConvexPwl::left_slope(double x) const {
    double cx = x0_;
    double last = -kInfv;
    for (const auto& s : segs_) {
        if (x <= cx + kDomTol) return last;
        last = s.slope;
        cx += s.length;
    }
    return x <= cx + kDomTol ? last : kInfv;
}

std::vector<double> ConvexPwl::breakpoints() const {
    std::vector<double> b;
    if (empty_) return b;
    double x = x0_;
    b.push_back(x);
    for (const auto& s : segs_) {
        x += s.length;
        b.push_back(x);
    }
    return b;
}

ConvexPwl ConvexPwl::reflected() const {
    ConvexPwl g;
    if (empty_) return g;
    g.empty_ = false;
    g.x0_ = -hi();
    g.v0_ = at(hi());
    for (auto it = segs_.rbegin(); it != segs_.rend(); ++it) g.push(it->length, -it->slope);
    return g;
}

ConvexPwl ConvexPwl::inf_convolution(const ConvexPwl& a, const ConvexPwl& b) {
    ConvexPwl c;
    if (a.empty_ || b.empty_) return c;
    c.empty_ = false;
    c.x0_ = a.x0_ + b.x0_;
    c.v0_ = a.v0_ + b.v0_;
    std::size_t i = 0, j = 0;
    c.segs_.reserve(a.segs_.size() + b.segs_.size());
    while (i < a.segs_.size() || j < b.segs_.size()) {
        bool take_a = j >= b.segs_.size() || (i < a.segs_.size() && a.segs_[i].slope <= b.segs_[j].slope);
        const Segment& s = take_a ? a.segs_[i++] : b.segs_[j++];
        c.push(s.length, s.slope);
    }
    return c;
}

ConvexPwl ConvexPwl::clipped(double lo, double hi_bound) const {
    ConvexPwl c;
    if (empty_) return c;
    double h = hi();
    double nlo = std::max(lo, x0_);
    double nhi = std::min(hi_bound, h);
    if (nlo > nhi + kDomTol) return c;
    if (nhi < nlo) nhi = nlo;
    c.empty_ = false;
    c.x0_ = nlo;
    c.v0_ = at(nlo);
    double cx = x0_;
    for (const auto& s : segs_) {
        double a = std::max(cx, nlo);
        double b = std::min(cx + s.length, nhi);
        if (b > a) c.push(b - a, s.slope);
        cx += s.length;
    }
    return c;
}

}  // namespace eths
