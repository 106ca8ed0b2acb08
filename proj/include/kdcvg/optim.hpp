#pragma once

#include "kdcvg/types.hpp"

#include <cmath>
#include <cstdint>

namespace kdcvg {

struct AdamHyper {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam descent step on `param` given the loss gradient.
/// `step` is the 1-based index of this update.
inline void adam_update(Matrix& param, Matrix& m, Matrix& v, const Matrix& grad, std::int64_t step,
                        const AdamHyper& h) {
    m = h.beta1 * m + (1.0 - h.beta1) * grad;
    v = h.beta2 * v + (1.0 - h.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(step));
    param.array() -= h.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + h.eps);
}

}  // namespace kdcvg
