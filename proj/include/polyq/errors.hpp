#pragma once

#include <stdexcept>
#include <string>

namespace polyq {

// Error categories; the CLI maps these onto process exit codes
// (config -> 2, budget -> 3, unconverged under --strict -> 4).
enum class Errc {
    config,
    budget,
    precondition,
    numeric,
    unsupported,
    unconverged,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, Errc code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

}  // namespace polyq
