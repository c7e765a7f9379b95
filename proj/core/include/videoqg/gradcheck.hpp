#pragma once

#include <functional>
#include <string>
#include <vector>

#include "videoqg/model.hpp"
#include "videoqg/tensor.hpp"

namespace videoqg {

struct GradCheckFailure {
  std::string where;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradCheckReport {
  std::size_t coordinates_checked = 0;
  double worst_rel_err = 0.0;
  std::vector<GradCheckFailure> failures;

  bool ok() const { return failures.empty(); }
};

// |a - n| / max(|a|, |n|), treated as 0 when both magnitudes are below 1e-8.
double fd_relative_error(double analytic, double numeric);

// Central differences with step h on every coordinate of every named leaf,
// compared against the analytic gradients of forward()'s backward sweep.
GradCheckReport check_gradients(const std::function<Tensor()>& forward,
                                const std::vector<std::pair<std::string, Tensor>>& leaves,
                                double tol, double h = 1e-5);

// Randomized finite-difference suite over every autodiff op.
GradCheckReport check_op_gradients(std::uint64_t seed, std::size_t trials_per_op = 20,
                                   double tol = 1e-4);

// Teacher-forced loss gradient of a whole model against finite differences,
// every parameter coordinate.
GradCheckReport check_model_gradients(QgModel& model, const MultimodalClip& clip,
                                      double tol = 1e-3);

}  // namespace videoqg
