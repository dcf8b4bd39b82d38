#pragma once

#include <functional>

namespace incdyn {

/// tanh-sinh (double exponential) quadrature on (a, b). Open rule: the
/// endpoints themselves are never evaluated, so integrable endpoint
/// blow-ups are fine. Levels are refined until the relative change of the
/// estimate drops below rel_tol.
double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, int max_level = 12);

}  // namespace incdyn
