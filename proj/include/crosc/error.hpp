#pragma once

#include <stdexcept>
#include <string>

namespace crosc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: schema violations, broken invariants, bad parameters.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (singular solve, eigensolver breakdown,
/// non-finite amplitudes, step rejection).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// (E - QHQ) is singular or E sits on a Q-space pole.
class PoleError : public NumericalError {
 public:
  PoleError(const std::string& what, double nearest_re, double nearest_im)
      : NumericalError(what), nearest_re_(nearest_re), nearest_im_(nearest_im) {}

  double nearest_re() const { return nearest_re_; }
  double nearest_im() const { return nearest_im_; }

 private:
  double nearest_re_;
  double nearest_im_;
};

}  // namespace crosc
