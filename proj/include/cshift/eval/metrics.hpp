#pragma once

#include "cshift/core/image.hpp"
#include "cshift/kernels/kernels.hpp"

namespace cshift::eval {

// Reported error unit across the whole harness: mean absolute error over all
// pixels and channels, times 100 for readability.
inline double l1_x100(const ImageF& pred, const ImageF& gt) {
    if (!pred.same_shape(gt)) throw ShapeError("l1_x100: shape mismatch");
    const double s = kernels::sum_abs_diff(pred.data.data(), gt.data.data(), pred.data.size());
    return 100.0 * s / static_cast<double>(pred.data.size());
}

inline double l1_x100(const PredictionMap& pred, const PredictionMap& gt) {
    if (!(pred.task == gt.task)) throw ShapeError("l1_x100: task mismatch");
    return l1_x100(pred.image, gt.image);
}

}  // namespace cshift::eval
