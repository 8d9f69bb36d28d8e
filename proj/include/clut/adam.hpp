#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace clut {

// Adaptive moment estimation over one flat parameter vector.
class Adam {
public:
    Adam() = default;
    explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
        if (params.size() != m_.size() || grad.size() != m_.size())
            throw std::invalid_argument("Adam::step: size mismatch");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1, t_);
        const double bc2 = 1.0 - std::pow(beta2, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
            v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
            const double mhat = m_[i] / bc1;
            const double vhat = v_[i] / bc2;
            params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }

    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

private:
    std::vector<double> m_, v_;
    long t_ = 0;
};

} // namespace clut
