#pragma once

#include <stdexcept>
#include <string>

namespace rankkit {

// Error categories mirror the C API status codes; the C wrapper maps each
// exception type to its code and stashes the message thread-locally.
enum class errc {
    invalid_argument = 1,
    dimension_mismatch = 2,
    not_finite = 3,
    io = 4,
    format = 5,
    domain = 6,
    diverged = 7,
    internal = 8,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void throw_error(errc code, const std::string& message) {
    throw error(code, message);
}

} // namespace rankkit
