#include "ulc/scalar.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace ulc {

namespace {

double initial_epsilon() {
    if (const char *env = std::getenv("ULC_EPSILON")) {
        char *end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && v > 0.0 && std::isfinite(v)) {
            return v;
        }
    }
    return 1e-9;
}

std::atomic<double> &epsilon_slot() {
    static std::atomic<double> eps{initial_epsilon()};
    return eps;
}

std::string format_real(double x, int digits) {
    if (x == 0.0) {
        return "0";  // also folds -0
    }
    std::ostringstream out;
    out.precision(digits);
    out << x;
    return out.str();
}

}  // namespace

double epsilon() { return epsilon_slot().load(std::memory_order_relaxed); }

void set_epsilon(double eps) { epsilon_slot().store(eps, std::memory_order_relaxed); }

bool near(Scalar a, Scalar b, double tol) { return std::abs(a - b) <= tol; }

int compare_scalars(Scalar a, Scalar b) {
    if (near(a, b)) {
        return 0;
    }
    if (a.real() != b.real()) {
        return a.real() < b.real() ? -1 : 1;
    }
    if (a.imag() != b.imag()) {
        return a.imag() < b.imag() ? -1 : 1;
    }
    return 0;
}

bool is_finite(Scalar a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); }

std::string format_scalar(Scalar a, int digits) {
    // Snap rounding noise so that 0.99999999999 prints as 1.
    double scale = std::pow(10.0, digits + 2);
    auto snap = [&](double x) {
        if (std::abs(x) < 1e-12) {
            return 0.0;
        }
        double r = std::round(x * scale) / scale;
        return std::abs(r - x) < 1e-12 ? r : x;
    };
    double re = snap(a.real());
    double im = snap(a.imag());
    if (im == 0.0) {
        return format_real(re, digits);
    }
    std::string imag;
    if (im == 1.0) {
        imag = "i";
    } else if (im == -1.0) {
        imag = "-i";
    } else {
        imag = format_real(im, digits) + "i";
    }
    if (re == 0.0) {
        return imag;
    }
    std::string out = format_real(re, digits);
    if (imag[0] != '-') {
        out += "+";
    }
    return out + imag;
}

}  // namespace ulc
