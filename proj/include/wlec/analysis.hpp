#pragma once

// Interval analysis over e-classes and the width-reduction pass built on it.

#include <span>

#include "wlec/ir.hpp"

namespace wlec {

struct ENode;
class EGraph;

/// Sound value range of `n` given the ranges of its child classes. Falls back
/// to the full range of the output annotation whenever truncation is possible.
Range interval_make(const ENode& n, std::span<const Range> child_ranges);

/// Intersection; throws Error when empty, which means some union was unsound.
Range interval_merge(const Range& a, const Range& b);

/// Adds `zext/sext(w,s) of op(w',s)` beside every operator node whose class
/// range fits a narrower annotation. Returns the number of nodes added.
size_t width_reduction_pass(EGraph& g);

std::string format_range(const Range& r);

}  // namespace wlec
