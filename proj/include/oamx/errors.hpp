#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oamx {

// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: shape, range, normalization, unknown label, incomplete config.
// Carries every individual issue so config validation can report them all.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(what), issues_{what} {}

  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out;
    for (const auto& s : issues) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> issues_;
};

// A correlation ratio whose denominator is zero.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

// Optimizer gave up. The best iterate found so far is attached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_params,
                   double best_value)
      : Error(what), best_params_(std::move(best_params)), best_value_(best_value) {}

  const std::vector<double>& best_params() const noexcept { return best_params_; }
  double best_value() const noexcept { return best_value_; }

 private:
  std::vector<double> best_params_;
  double best_value_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace oamx
