#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace varmcs {

/// Malformed input or a violated precondition. The CLI maps it to exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that produced a non-finite or otherwise unusable value.
/// Carries the time index where the failure surfaced, if there is one.
/// The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what,
                            std::optional<std::size_t> time_index = std::nullopt)
        : std::runtime_error(time_index ? what + " (t=" + std::to_string(*time_index) + ")"
                                        : what),
          time_index_(time_index) {}

    [[nodiscard]] std::optional<std::size_t> time_index() const noexcept { return time_index_; }

private:
    std::optional<std::size_t> time_index_;
};

}  // namespace varmcs
