#pragma once

#include <stdexcept>
#include <string>

namespace sqz {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class NotPsd : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    FormatError(const std::string& what, long line = -1)
        : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

/// Two points with different labels coincide, so no Δ > 0 is attainable.
class DegenerateData : public Error {
public:
    using Error::Error;
};

class StratifyError : public Error {
public:
    using Error::Error;
};

/// Δ exceeds the smallest cross-class distance.
class Infeasible : public Error {
public:
    Infeasible(const std::string& what, double delta) : Error(what), delta_(delta) {}
    double delta() const noexcept { return delta_; }

private:
    double delta_;
};

class NoConstraints : public Error {
public:
    using Error::Error;
};

class DegenerateContacts : public Error {
public:
    using Error::Error;
};

class DegenerateLda : public Error {
public:
    using Error::Error;
};

/// A check that requires a certified optimum was handed an uncertified one.
class Inconclusive : public Error {
public:
    using Error::Error;
};

} // namespace sqz
