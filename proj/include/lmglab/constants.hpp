#pragma once

// Shared physical conversion constants. All internal computations use
// dimensionless units with J = 1; these factors enter only at I/O boundaries
// (CLI arguments, reports, physical-rate conversions).
namespace lmg {

// Benchmark LMG coupling in angular-frequency units (rad/s).
inline constexpr double J_PHYS_DEFAULT = 37195.4;

// k_B * (1 nK) in angular-frequency units: kBT[rad/s] = 131.0 * T[nK],
// i.e. 1310 rad/s at the 10 nK benchmark.
inline constexpr double KBT_PER_NK = 131.0;

inline constexpr const char* ARTIFACT_VERSION = "1.0.0";

}  // namespace lmg
