#pragma once

#include <stdexcept>
#include <string>

namespace gdae {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a documented precondition (bad parameter, bad shape).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Sample variants that do not belong together (e.g. a binary vector fed to
// a discrete corruption process).
class VariantMismatch : public Error {
 public:
  using Error::Error;
};

// A Markov kernel is not strictly positive / not stochastic, so the
// stationary distribution is not guaranteed to be unique.
class ErgodicityError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Malformed or unreadable external data (files, configs, CSV).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace gdae
