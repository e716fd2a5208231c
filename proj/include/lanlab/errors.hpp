#pragma once

#include <stdexcept>
#include <string>

namespace lanlab {

/// Base class of every error raised by the toolkit.
class LanlabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Lévy-measure or drift specification that cannot be used (e.g. alpha >= 2).
class InvalidSpec : public LanlabError {
 public:
  using LanlabError::LanlabError;
};

/// Condition H failed in a way that makes the measure unusable.
class ConditionHViolation : public LanlabError {
 public:
  enum class Part { MomentTail, PositiveDensity };
  ConditionHViolation(Part part, const std::string& what)
      : LanlabError(what), part_(part) {}
  Part part() const noexcept { return part_; }

 private:
  Part part_;
};

/// Condition A failed on the probe grid.
class ConditionAViolation : public LanlabError {
 public:
  ConditionAViolation(double x, double theta, const std::string& what)
      : LanlabError(what), x_(x), theta_(theta) {}
  double x() const noexcept { return x_; }
  double theta() const noexcept { return theta_; }

 private:
  double x_;
  double theta_;
};

class NumericalBlowup : public LanlabError {
 public:
  NumericalBlowup(double time, const std::string& what)
      : LanlabError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class InvalidScheme : public LanlabError {
 public:
  using LanlabError::LanlabError;
};

/// The transition density vanishes (or underflows the floor) at the point
/// where a score is requested.
class ScoreUndefined : public LanlabError {
 public:
  ScoreUndefined(double y, const std::string& what)
      : LanlabError(what), y_(y) {}
  double y() const noexcept { return y_; }

 private:
  double y_;
};

class NonpositiveFisher : public LanlabError {
 public:
  using LanlabError::LanlabError;
};

class LikelihoodUndefined : public LanlabError {
 public:
  using LanlabError::LanlabError;
};

class NoUniqueInvariant : public LanlabError {
 public:
  using LanlabError::LanlabError;
};

/// Malformed or out-of-range experiment configuration.
class ConfigError : public LanlabError {
 public:
  using LanlabError::LanlabError;
};

}  // namespace lanlab
