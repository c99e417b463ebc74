#pragma once

#include <stdexcept>
#include <string>

namespace spearlab {

/// Base class for all spearlab errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class EmptyInputError : public Error {
 public:
  explicit EmptyInputError(const std::string& what = "empty input") : Error(what) {}
};

class EmptyAfterCleaningError : public Error {
 public:
  explicit EmptyAfterCleaningError(const std::string& what) : Error(what) {}
};

class RetriesExhaustedError : public Error {
 public:
  RetriesExhaustedError(const std::string& what, int attempts)
      : Error(what), attempts(attempts) {}
  int attempts;
};

class SingleClassInputError : public Error {
 public:
  explicit SingleClassInputError(const std::string& what) : Error(what) {}
};

class LabelLengthMismatchError : public Error {
 public:
  explicit LabelLengthMismatchError(const std::string& what) : Error(what) {}
};

class EvenJudgeCountError : public Error {
 public:
  explicit EvenJudgeCountError(const std::string& what) : Error(what) {}
};

class MissingBallotError : public Error {
 public:
  explicit MissingBallotError(const std::string& what) : Error(what) {}
};

class LengthMismatchError : public Error {
 public:
  explicit LengthMismatchError(const std::string& what) : Error(what) {}
};

class UnknownSessionError : public Error {
 public:
  explicit UnknownSessionError(const std::string& what) : Error(what) {}
};

class PayloadTooLargeError : public Error {
 public:
  explicit PayloadTooLargeError(const std::string& what) : Error(what) {}
};

class MissingSlotError : public Error {
 public:
  explicit MissingSlotError(const std::string& what) : Error(what) {}
};

class ConfigInvalidError : public Error {
 public:
  explicit ConfigInvalidError(const std::string& what) : Error(what) {}
};

class StageFailedError : public Error {
 public:
  StageFailedError(const std::string& stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage(stage) {}
  std::string stage;
};

class ModelFormatError : public Error {
 public:
  explicit ModelFormatError(const std::string& what) : Error(what) {}
};

}  // namespace spearlab
