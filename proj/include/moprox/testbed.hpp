#pragma once

#include "moprox/image.hpp"
#include "moprox/problem.hpp"

namespace moprox {

/// m = 3 smooth test problem on R^n:
///   f_1 = (1/n^2) sum i (x_i - i)^4
///   f_2 = exp(sum x_i / n) + ||x||^2
///   f_3 = (1/(n(n+1))) sum i (n - i + 1) exp(-x_i)
/// with g_1 = g_2 = g_3 = 0.
MultiObjectiveProblem make_problem1(int n);

/// The smooth parts of make_problem1 with every g_i the indicator of the nonnegative orthant.
MultiObjectiveProblem make_problem2(int n);

/// Wavelet-domain deblurring with a second, purely regularizing objective:
///   f_1 = ||B W x - b||^2, f_2 = 0, g_1 = lambda ||x||_1, g_2 = lambda ||x - 1||_1
/// where W is the inverse Haar transform and B the blur.
MultiObjectiveProblem make_problem3(const GrayImage& observed, double lambda_reg, const LinearOperatorPair& blur);

}  // namespace moprox
