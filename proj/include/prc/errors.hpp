#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prc {

/// Error with a stable machine-readable class ("config", "data", "fit", "io")
/// in front of the human-readable detail. The CLI prints
/// "error: <class>: <detail>" and exits nonzero.
class Error : public std::runtime_error {
public:
    Error(std::string error_class, const std::string& message)
        : std::runtime_error(error_class + ": " + message),
          class_(std::move(error_class)), message_(message) {}

    const std::string& error_class() const noexcept { return class_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string class_;
    std::string message_;
};

inline Error config_error(const std::string& msg) { return Error("config", msg); }
inline Error data_error(const std::string& msg) { return Error("data", msg); }
inline Error fit_error(const std::string& msg) { return Error("fit", msg); }
inline Error io_error(const std::string& msg) { return Error("io", msg); }

// Non-fatal diagnostics are collected into a caller-supplied sink; a null
// sink discards them.
using WarningSink = std::vector<std::string>*;

inline void warn(WarningSink sink, std::string message) {
    if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace prc
