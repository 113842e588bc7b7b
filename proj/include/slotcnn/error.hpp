#pragma once

#include <stdexcept>
#include <string>

namespace slotcnn {

// Root of every error the library throws. The CLI maps subclasses onto
// exit codes (see cli/cli.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class SpanError : public Error {
 public:
  using Error::Error;
};

class UncoveredSlotError : public Error {
 public:
  using Error::Error;
};

class VariantError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, long line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class DivergedError : public NumericError {
 public:
  DivergedError(int epoch, int batch, double loss)
      : NumericError("training diverged at epoch " + std::to_string(epoch) +
                     ", batch " + std::to_string(batch) +
                     " (loss=" + std::to_string(loss) + ")"),
        epoch_(epoch),
        batch_(batch) {}
  int epoch() const { return epoch_; }
  int batch() const { return batch_; }

 private:
  int epoch_;
  int batch_;
};

}  // namespace slotcnn
