#include "nuelab/intervals.hpp"

#include <algorithm>

namespace nuelab {

SegmentSet normalized(SegmentSet set) {
  std::erase_if(set, [](const Segment& s) { return !(s.hi > s.lo); });
  std::sort(set.begin(), set.end(), [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
  SegmentSet out;
  for (const Segment& s : set) {
    if (!out.empty() && s.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, s.hi);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

SegmentSet intersect(const SegmentSet& a, const SegmentSet& b) {
  SegmentSet out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (hi > lo) out.push_back({lo, hi});
    if (a[i].hi < b[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

double total_length(const SegmentSet& set) {
  double sum = 0.0;
  for (const Segment& s : set) sum += s.hi - s.lo;
  return sum;
}

SegmentSet neighbourhood(const DomainSpec& domain, double c, double r) {
  if (domain.kind == DomainKind::Circle) {
    if (r >= 0.5) return {{0.0, 1.0}};
    SegmentSet parts = {{c - r, c + r}};
    if (c - r < 0.0) parts = {{0.0, c + r}, {c - r + 1.0, 1.0}};
    if (c + r > 1.0) parts = {{0.0, c + r - 1.0}, {c - r, 1.0}};
    return normalized(parts);
  }
  return normalized({{std::max(domain.lo0, c - r), std::min(domain.hi0, c + r)}});
}

SegmentSet preimage(const DynamicalSystem& sys, const SegmentSet& set) {
  SegmentSet out;
  for (const Branch& b : sys.branches()) {
    const SegmentSet inside = intersect(set, {{b.image_lo(), b.image_hi()}});
    for (const Segment& s : inside) {
      const double u = b.inverse(s.lo);
      const double v = b.inverse(s.hi);
      const double lo = std::max(b.lo, std::min(u, v));
      const double hi = std::min(b.hi, std::max(u, v));
      if (hi > lo) out.push_back({lo, hi});
    }
  }
  return normalized(out);
}

double constrained_measure(const DynamicalSystem& sys, const std::vector<SegmentSet>& targets) {
  if (sys.dimension() != 1 || sys.branches().empty()) {
    throw ConfigError(sys.name() + ": exact interval enumeration needs declared monotone branches");
  }
  if (targets.empty()) return sys.domain().volume();
  SegmentSet current = normalized(targets.back());
  for (std::size_t i = targets.size() - 1; i-- > 0;) {
    current = intersect(normalized(targets[i]), preimage(sys, current));
    if (current.empty()) return 0.0;
  }
  return total_length(current);
}

double branch_step(const DynamicalSystem& sys, double x) {
  const auto& branches = sys.branches();
  for (const Branch& b : branches) {
    if (x >= b.lo && x < b.hi) return b.forward(x);
  }
  if (!branches.empty() && x == branches.back().hi) return branches.back().forward(x);
  throw LeftDomain(sys.name() + ": point outside every branch");
}

}  // namespace nuelab
