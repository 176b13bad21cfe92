#pragma once

#include <stdexcept>
#include <string>

namespace eths {

enum class ErrorKind { validation, infeasible, timeout, io, bound, usage };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error(ErrorKind::validation, w) {}
};
struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& w) : Error(ErrorKind::infeasible, w) {}
};
struct TimeoutError : Error {
    explicit TimeoutError(const std::string& w) : Error(ErrorKind::timeout, w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};
struct UsageError : Error {
    explicit UsageError(const std::string& w) : Error(ErrorKind::usage, w) {}
};

// SOC left its allowed band.
struct BoundViolation : Error {
    BoundViolation(const std::string& w, int tick, double bound, double value)
        : Error(ErrorKind::bound, w), tick(tick), bound(bound), value(value) {}
    int tick;
    double bound;
    double value;
};

}  // namespace eths
