#include "mpq/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "mpq/circuit.hpp"
#include "mpq/errors.hpp"

namespace mpq {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

const std::map<std::string, double>& hz_units() {
    static const std::map<std::string, double> m{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    return m;
}

const char* dim_name(Dim d) {
    switch (d) {
        case Dim::None: return "dimensionless";
        case Dim::Frequency: return "frequency";
        case Dim::Rate: return "rate";
        case Dim::Time: return "time";
        case Dim::Capacitance: return "capacitance";
        case Dim::Inductance: return "inductance";
        case Dim::Flux: return "flux";
    }
    return "?";
}

}  // namespace

Quantity parse_quantity(std::string_view text) {
    const std::string_view s = trim(text);
    Quantity q;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, q.value);
    if (ec != std::errc() || ptr == first) throw ValidationError("not a quantity: '" + std::string(text) + "'");
    q.unit = std::string(trim(std::string_view(ptr, last - ptr)));
    if (!std::isfinite(q.value)) throw ValidationError("non-finite quantity: '" + std::string(text) + "'");
    return q;
}

std::string format_quantity(const Quantity& q) {
    char buf[40];
    // shortest form that reads back identically
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, q.value);
    const std::string num(buf, ec == std::errc() ? ptr : buf);
    return q.unit.empty() ? num : num + " " + q.unit;
}

double to_si(const Quantity& q, Dim dim, bool angular_rates) {
    auto fail = [&]() -> double {
        throw ValidationError("unit '" + q.unit + "' is not a valid " + dim_name(dim) + " unit (value " +
                              format_quantity(q) + ")");
    };
    const std::string& u = q.unit;
    switch (dim) {
        case Dim::None:
            return u.empty() ? q.value : fail();
        case Dim::Frequency: {
            if (u == "rad/s") return q.value;
            auto it = hz_units().find(u);
            return it == hz_units().end() ? fail() : kTwoPi * q.value * it->second;
        }
        case Dim::Rate: {
            double scale = 0.0;
            if (u == "1/s" || u == "/s" || u == "s^-1")
                scale = 1.0;
            else if (auto it = hz_units().find(u); it != hz_units().end())
                scale = it->second;
            else
                return fail();
            return q.value * scale * (angular_rates ? kTwoPi : 1.0);
        }
        case Dim::Time: {
            static const std::map<std::string, double> m{{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}};
            auto it = m.find(u);
            return it == m.end() ? fail() : q.value * it->second;
        }
        case Dim::Capacitance: {
            static const std::map<std::string, double> m{{"F", 1.0}, {"nF", 1e-9}, {"pF", 1e-12}, {"fF", 1e-15}, {"aF", 1e-18}};
            auto it = m.find(u);
            return it == m.end() ? fail() : q.value * it->second;
        }
        case Dim::Inductance: {
            static const std::map<std::string, double> m{{"H", 1.0}, {"uH", 1e-6}, {"nH", 1e-9}, {"pH", 1e-12}};
            auto it = m.find(u);
            return it == m.end() ? fail() : q.value * it->second;
        }
        case Dim::Flux:
            if (u == "Wb") return q.value;
            if (u == "Phi0") return q.value * kFluxQuantum;
            return fail();
    }
    return fail();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace mpq
