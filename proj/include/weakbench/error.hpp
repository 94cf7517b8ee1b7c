#pragma once

#include <stdexcept>
#include <string>

namespace weakbench {

// Error families map one-to-one onto CLI exit codes.
enum class ErrorFamily {
    config = 2,
    store = 3,
    gateway = 4,
    parse = 5,
    protocol = 6,
    review = 7,
    io = 8,
};

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, std::string message)
        : std::runtime_error(std::move(message)), family_(family) {}

    ErrorFamily family() const noexcept { return family_; }
    int exit_code() const noexcept { return static_cast<int>(family_); }

private:
    ErrorFamily family_;
};

struct ConfigError : Error {
    explicit ConfigError(std::string m) : Error(ErrorFamily::config, std::move(m)) {}
};
struct StoreError : Error {
    explicit StoreError(std::string m) : Error(ErrorFamily::store, std::move(m)) {}
};
struct GatewayError : Error {
    explicit GatewayError(std::string m) : Error(ErrorFamily::gateway, std::move(m)) {}
};
struct ParseError : Error {
    explicit ParseError(std::string m) : Error(ErrorFamily::parse, std::move(m)) {}
};
struct ProtocolError : Error {
    explicit ProtocolError(std::string m) : Error(ErrorFamily::protocol, std::move(m)) {}
};
struct ReviewError : Error {
    explicit ReviewError(std::string m) : Error(ErrorFamily::review, std::move(m)) {}
};
struct IoError : Error {
    explicit IoError(std::string m) : Error(ErrorFamily::io, std::move(m)) {}
};

}  // namespace weakbench
