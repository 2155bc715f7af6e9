#pragma once

#include <stdexcept>
#include <string>

namespace hystab {

// Error taxonomy shared across the library. Everything derives from Error so
// callers can catch the whole family at once.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rate-field evaluation outside a restricted working rectangle.
class DomainError : public Error {
public:
    using Error::Error;
};

// Integrated output exceeded the configured blowup bound.
class BlowupError : public Error {
public:
    using Error::Error;
};

// Anhysteresis root bracketing found no sign change.
class NoRootError : public Error {
public:
    using Error::Error;
};

// Intersecting-function bracket expansion exhausted the search bound.
class NoIntersectError : public Error {
public:
    using Error::Error;
};

// f1 == f2 on a set with nonempty interior; no anhysteresis curve exists.
class AnhysteresisDegenerate : public Error {
public:
    using Error::Error;
};

// Matrix dimension mismatch or invalid scalar parameter.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Certificates for the D=0 theorems require zero feedthrough.
class FeedthroughNotZero : public Error {
public:
    using Error::Error;
};

// The D=0 theorems require CB > 0.
class NonpositiveCB : public Error {
public:
    using Error::Error;
};

// |1 - sign*D*f_i| fell below the solvability threshold.
class AlgebraicLoopSingular : public Error {
public:
    using Error::Error;
};

// invariant_set was asked to use a certificate whose verification failed.
class UnverifiedCertificate : public Error {
public:
    using Error::Error;
};

// Experiment configuration failed schema validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace hystab
