#pragma once

#include "nuelab/systems.hpp"

#include <vector>

namespace nuelab {

/// A closed segment [lo, hi] of the real line.
struct Segment {
  double lo;
  double hi;
};

/// Sorted, disjoint segments.
using SegmentSet = std::vector<Segment>;

SegmentSet normalized(SegmentSet set);
SegmentSet intersect(const SegmentSet& a, const SegmentSet& b);
double total_length(const SegmentSet& set);

/// The open r-neighbourhood of c in a 1-D domain, clipped to the domain and
/// split at the identification point on the circle.
SegmentSet neighbourhood(const DomainSpec& domain, double c, double r);

/// Preimage of `set` under the system's monotone branches.
SegmentSet preimage(const DynamicalSystem& sys, const SegmentSet& set);

/// Lebesgue measure of {y : f^i(y) in targets[i], i < targets.size()},
/// enumerated backwards through the branch inverses. Requires branches.
double constrained_measure(const DynamicalSystem& sys, const std::vector<SegmentSet>& targets);

/// One iterate computed through the branch that contains x (no dithering).
double branch_step(const DynamicalSystem& sys, double x);

}  // namespace nuelab
