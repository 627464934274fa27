#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mpq {

enum class Dim { None, Frequency, Rate, Time, Capacitance, Inductance, Flux };

// A number with the unit it was written in, so configs re-emit exactly as read.
struct Quantity {
    double value = 0.0;
    std::string unit;

    bool operator==(const Quantity&) const = default;
};

// "10 GHz", "330 fF", "0.25", "1e6 1/s". Throws ValidationError on malformed text.
Quantity parse_quantity(std::string_view text);
std::string format_quantity(const Quantity& q);

// SI value. Frequencies (Hz, kHz, MHz, GHz) become angular: x 2 pi. Rates are plain s^-1
// (Hz-like suffixes scale by powers of ten only) unless `angular_rates` is set. Flux
// accepts Wb or Phi0. Throws ValidationError on a missing or mismatched unit.
double to_si(const Quantity& q, Dim dim, bool angular_rates = false);

// Writes to a sibling temporary and renames over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace mpq
