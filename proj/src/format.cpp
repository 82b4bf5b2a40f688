#include "vclean/format.hpp"

#include <charconv>
#include <system_error>

#include "vclean/errors.hpp"

namespace vclean {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view text) {
    const auto* ws = " \t\r\n";
    const auto first = text.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(ws);
    return text.substr(first, last - first + 1);
}

double parse_double(std::string_view text) {
    const auto t = trim(text);
    double value = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw DataError("cannot parse '" + std::string(text) + "' as a number");
    }
    return value;
}

long long parse_int(std::string_view text) {
    const auto t = trim(text);
    long long value = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw DataError("cannot parse '" + std::string(text) + "' as an integer");
    }
    return value;
}

}  // namespace vclean
