#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace boga {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class EmptySequenceError : public Error {
  public:
    EmptySequenceError() : Error("sequence must contain at least one residue") {}
};

class InvalidResidueError : public Error {
  public:
    InvalidResidueError(std::size_t position, char residue)
        : Error("invalid residue '" + std::string(1, residue) + "' at position " +
                std::to_string(position)),
          position_(position), residue_(residue) {}
    std::size_t position() const { return position_; }
    char residue() const { return residue_; }

  private:
    std::size_t position_;
    char residue_;
};

class InvalidStrategyParamsError : public Error {
  public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
  public:
    using Error::Error;
};

class MalformedRowError : public Error {
  public:
    MalformedRowError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class DuplicateSequenceError : public Error {
  public:
    DuplicateSequenceError(std::size_t line, const std::string& sequence)
        : Error("line " + std::to_string(line) + ": duplicate sequence '" + sequence + "'"),
          line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class ConstantTargetsError : public Error {
  public:
    ConstantTargetsError() : Error("holdout targets are constant; R^2 is undefined") {}
};

class SizeMismatchError : public Error {
  public:
    using Error::Error;
};

// External-evaluator failures. The batch API reports these per sequence; the
// strict API throws them.
class EvaluatorError : public Error {
  public:
    using Error::Error;
};

class EvaluatorTimeoutError : public EvaluatorError {
  public:
    explicit EvaluatorTimeoutError(const std::string& sequence)
        : EvaluatorError("evaluator timed out on sequence '" + sequence + "'") {}
};

class EvaluatorProtocolError : public EvaluatorError {
  public:
    using EvaluatorError::EvaluatorError;
};

class NonFiniteScoreError : public EvaluatorError {
  public:
    explicit NonFiniteScoreError(const std::string& sequence)
        : EvaluatorError("evaluator returned a non-finite score for sequence '" + sequence +
                         "'") {}
};

/// The evaluator process died or never completed the handshake. Campaigns
/// abort with a checkpoint when this is thrown.
class EvaluatorLostError : public EvaluatorError {
  public:
    using EvaluatorError::EvaluatorError;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class MalformedLogError : public Error {
  public:
    using Error::Error;
};

} // namespace boga
