#pragma once

#include <stdexcept>
#include <string>

namespace mvdist {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shapes of delta / sigma / bounds / truncation do not agree.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NotSymmetric : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

// Bounds or truncation limits violate l_i < u_i (strict).
class InvalidBounds : public Error {
public:
    using Error::Error;
};

class InvalidDf : public Error {
public:
    using Error::Error;
};

// A value that must be finite is NaN or infinite.
class InvalidValue : public Error {
public:
    using Error::Error;
};

// Scalar argument outside its domain (probabilities outside (0,1), x <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class UnknownMethod : public Error {
public:
    using Error::Error;
};

class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

// Truncation box whose probability estimate is statistically indistinguishable
// from zero: the normalizing constant is <= its own error bound.
class DegenerateTruncation : public Error {
public:
    using Error::Error;
};

// Rejection sampling exhausted its proposal budget before producing the
// requested number of draws.
class AcceptanceTooLow : public Error {
public:
    AcceptanceTooLow(const std::string& what, double acceptance_rate)
        : Error(what), acceptance_rate_(acceptance_rate) {}

    double acceptance_rate() const { return acceptance_rate_; }

private:
    double acceptance_rate_;
};

}  // namespace mvdist
