#ifndef ROADS_ERRORS_H_
#define ROADS_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roads {

// Base class for every error raised by the library. Callers that only need
// to distinguish "bad data" from "bad usage" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateUserError : public Error {
 public:
  using Error::Error;
};

// A title missed the alias table and no kind hint was given.
class MissingKindError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRangeError : public Error {
 public:
  using Error::Error;
};

// A count would go below zero; the removed contribution was never added.
class UnderflowError : public Error {
 public:
  using Error::Error;
};

class ConceptNotInTaxonomyError : public Error {
 public:
  using Error::Error;
};

class NoEvaluableStepsError : public Error {
 public:
  using Error::Error;
};

}  // namespace roads

#endif  // ROADS_ERRORS_H_
