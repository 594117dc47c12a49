#pragma once

namespace ltsi::defaults {

// Relative singular-value threshold for rank decisions (fraction of sigma_max).
inline constexpr double rank_rel_threshold = 1e-9;

// Condition-number ceiling beyond which pointwise inverses and state
// transforms are treated as singular.
inline constexpr double condition_ceiling = 1e12;

// Default bound for "certified bounded at grid scale" sup verdicts.
inline constexpr double sup_bound = 1e6;

// Samples closer to omega = 0 than this are punctured from built-in grids.
inline constexpr double zero_exclusion = 1e-8;

// Relative gap tolerance for two-sided limit extensions at rank drops.
inline constexpr double extension_gap_tol = 1e-4;

}  // namespace ltsi::defaults
