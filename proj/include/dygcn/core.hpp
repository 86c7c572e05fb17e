#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace dygcn {

// Bad user-supplied input: files, configs, CLI arguments. Exit code 2.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown: divergence, non-finite values. Exit code 3.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated API contract (shape mismatch, bad index, inconsistent delta).
struct contract_error : std::logic_error {
    explicit contract_error(const std::string& msg) : std::logic_error(msg) {}
};

enum class Activation { identity, relu, tanh_ };

inline Activation activation_from_string(const std::string& s) {
    if (s == "identity") return Activation::identity;
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh_;
    throw input_error("unknown activation: " + s);
}

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        default: return "tanh";
    }
}

inline double activate(Activation a, double x) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::relu: return x > 0.0 ? x : 0.0;
        default: return std::tanh(x);
    }
}

// Derivative expressed through the pre-activation value. Subgradient at 0 is 0.
inline double activate_deriv(Activation a, double pre) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
        default: {
            double t = std::tanh(pre);
            return 1.0 - t * t;
        }
    }
}

}  // namespace dygcn
