#pragma once

#include <cmath>
#include <complex>

namespace qtrap {

/// Neumaier-compensated accumulator. The result depends only on the order
/// of add() calls, so a fixed loop order is bit-reproducible.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class CompensatedComplexSum {
public:
    void add(std::complex<double> z) noexcept {
        re_.add(z.real());
        im_.add(z.imag());
    }

    CompensatedComplexSum& operator+=(std::complex<double> z) noexcept {
        add(z);
        return *this;
    }

    std::complex<double> value() const noexcept { return {re_.value(), im_.value()}; }

private:
    CompensatedSum re_;
    CompensatedSum im_;
};

}  // namespace qtrap
