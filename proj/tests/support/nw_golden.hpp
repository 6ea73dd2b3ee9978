#pragma once

// 12-point regression with AR(1) errors and its HAC standard errors, computed
// once by an independent implementation (Bartlett kernel, no small-sample
// correction) and frozen here. Regenerate with fixtures/gen_newey_west_golden.py.

#include <array>
#include <vector>

namespace dcs::golden {

inline const std::vector<double> kAr1X{-0.006827, 0.737492, 2.061272, 0.609808, 0.258132, 0.132931,
                                       -1.83101,  -2.005549, -0.31648, -0.247743, 0.509244, -0.191825};
inline const std::vector<double> kAr1Y{2.04273,  2.615774, 1.448592, -0.306781, 1.321987, 1.658806,
                                       0.527729, 1.994232, 2.789613, 2.462917,  1.703614, 1.013811};

inline constexpr double kBeta = -0.0033127331911301794;
inline constexpr double kIntercept = 1.6060051224006373;

struct NeweyWestRow {
  int lag;
  double se_beta;
  double se_intercept;
};

inline constexpr std::array<NeweyWestRow, 4> kNeweyWest{{{0, 0.19865592582507602, 0.24713849342666067},
                                                         {1, 0.1849000807610433, 0.27569631978973547},
                                                         {2, 0.16117666084300447, 0.25810696080650347},
                                                         {3, 0.11648879015799593, 0.24379639959803498}}};

}  // namespace dcs::golden
