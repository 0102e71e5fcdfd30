#pragma once

#include <cmath>
#include <complex>

namespace thinlevy {

// Neumaier's variant of compensated summation. Works for real and complex values
// (the complex case compensates the two parts independently).
template <class T = double>
class NeumaierSum {
public:
    void add(T x) { add_impl(x); }
    NeumaierSum& operator+=(T x) { add_impl(x); return *this; }
    T value() const { return sum_ + comp_; }
    void reset() { sum_ = T{}; comp_ = T{}; }

private:
    static void step(double& s, double& c, double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    void add_impl(double x) requires std::is_same_v<T, double> { step(sum_, comp_, x); }
    void add_impl(std::complex<double> x) requires (!std::is_same_v<T, double>) {
        double sr = sum_.real(), si = sum_.imag(), cr = comp_.real(), ci = comp_.imag();
        step(sr, cr, x.real());
        step(si, ci, x.imag());
        sum_ = {sr, si};
        comp_ = {cr, ci};
    }

    T sum_{};
    T comp_{};
};

} // namespace thinlevy
