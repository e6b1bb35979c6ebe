#ifndef SEQEMO_NN_GRADCHECK_HPP
#define SEQEMO_NN_GRADCHECK_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "seqemo/rng.hpp"
#include "seqemo/tensor.hpp"

namespace seqemo {

// Central-difference gradient verification, meant to run in double.
//
// f evaluates the scalar objective at the current parameter values; params
// are the tensors f reads (perturbed in place); analytic holds the gradients
// under test, aligned with params. When max_coords_per_tensor > 0, only a
// seeded random coordinate subset of each tensor is probed.
//
// Returns the max over probed coordinates of
//   |numeric - analytic| / max(floor, |numeric| + |analytic|).
// The floor sets the gradient scale below which the comparison turns
// absolute; deep compositions need a floor above the central-difference
// roundoff of their objective or near-vanishing coordinates read as noise.
inline double finite_diff_check(
    const std::function<double()>& f, std::vector<Tensor<double>*> params,
    std::vector<const Tensor<double>*> analytic, double h,
    int64_t max_coords_per_tensor = -1, uint64_t subsample_seed = 0,
    double floor = 1e-8) {
  if (params.size() != analytic.size())
    throw ShapeError("finite_diff_check params/analytic size mismatch");
  Rng rng(subsample_seed);
  double worst = 0.0;
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor<double>& t = *params[p];
    const Tensor<double>& g = *analytic[p];
    if (!t.same_shape(g))
      throw ShapeError("finite_diff_check gradient shape mismatch");
    std::vector<int64_t> coords;
    if (max_coords_per_tensor > 0 && t.size() > max_coords_per_tensor) {
      for (int64_t k = 0; k < max_coords_per_tensor; ++k)
        coords.push_back(static_cast<int64_t>(
            rng.uniform_int(static_cast<uint64_t>(t.size()))));
    } else {
      coords.resize(static_cast<size_t>(t.size()));
      for (int64_t k = 0; k < t.size(); ++k) coords[static_cast<size_t>(k)] = k;
    }
    for (int64_t i : coords) {
      const double saved = t[i];
      t[i] = saved + h;
      const double fp = f();
      t[i] = saved - h;
      const double fm = f();
      t[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw NumericError("finite_diff_check objective is not finite");
      const double numeric = (fp - fm) / (2.0 * h);
      const double err = std::abs(numeric - g[i]) /
                         std::max(floor, std::abs(numeric) + std::abs(g[i]));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace seqemo

#endif  // SEQEMO_NN_GRADCHECK_HPP
