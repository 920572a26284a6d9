#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "esadapt/errors.hpp"

namespace esadapt {

/// Closed set of scalar time signals used to describe uncertainties.
///
/// value(t) = offset                                   (Constant)
/// value(t) = offset + amplitude * sin(frequency * t)  (Sine)
/// value(t) = offset + amplitude * cos(frequency * t)  (Cosine)
struct Waveform {
    enum class Kind { Constant, Sine, Cosine };

    Kind kind = Kind::Constant;
    double amplitude = 0.0;
    double frequency = 0.0;  // rad/s
    double offset = 0.0;

    static constexpr Waveform constant(double value) { return {Kind::Constant, 0.0, 0.0, value}; }
    static constexpr Waveform sine(double offset, double amplitude, double frequency) {
        return {Kind::Sine, amplitude, frequency, offset};
    }
    static constexpr Waveform cosine(double offset, double amplitude, double frequency) {
        return {Kind::Cosine, amplitude, frequency, offset};
    }

    [[nodiscard]] double operator()(double t) const {
        switch (kind) {
            case Kind::Sine:
                return offset + amplitude * std::sin(frequency * t);
            case Kind::Cosine:
                return offset + amplitude * std::cos(frequency * t);
            case Kind::Constant:
                break;
        }
        return offset;
    }

    /// sup_t |value(t)|
    [[nodiscard]] double peak() const {
        return kind == Kind::Constant ? std::abs(offset) : std::abs(offset) + std::abs(amplitude);
    }

    bool operator==(const Waveform&) const = default;
};

inline std::string_view to_string(Waveform::Kind kind) {
    switch (kind) {
        case Waveform::Kind::Sine:
            return "sine";
        case Waveform::Kind::Cosine:
            return "cosine";
        case Waveform::Kind::Constant:
            break;
    }
    return "constant";
}

inline Waveform::Kind waveform_kind_from_string(std::string_view name) {
    if (name == "constant") return Waveform::Kind::Constant;
    if (name == "sine") return Waveform::Kind::Sine;
    if (name == "cosine") return Waveform::Kind::Cosine;
    throw SchemaError("unknown waveform kind '" + std::string(name) + "' (expected constant|sine|cosine)");
}

}  // namespace esadapt
