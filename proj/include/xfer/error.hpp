/*
 * Copyright 2026 The xfer Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef XFER_ERROR_HPP_
#define XFER_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xfer {

// Every failure raised by the library derives from Error. The category maps
// onto the command-line exit-code taxonomy (data = 2, numerical = 3).
class Error : public std::runtime_error {
 public:
  enum class Category { kData, kNumerical };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const { return category_; }

 private:
  Category category_;
};

// Malformed, inconsistent or missing input.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Category::kData, what) {}
};

class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::size_t line)
      : DataError(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : DataError(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Too few samples for the requested statistic.
class InsufficientSamplesError : public DataError {
 public:
  using DataError::DataError;
};

// XFT1 container failures.
class BadMagicError : public DataError {
 public:
  using DataError::DataError;
};
class TruncatedError : public DataError {
 public:
  using DataError::DataError;
};
class UnsupportedDtypeError : public DataError {
 public:
  using DataError::DataError;
};

// The inputs are well-formed but do not support the requested computation.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(Category::kNumerical, what) {}
};

class NotPsdError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A task whose label carries no information (zero optimal H-score, all pixels
// constant, ...).
class DegenerateTaskError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankError : public NumericalError {
 public:
  RankError(const std::string& what, std::size_t rank)
      : NumericalError(what), rank_(rank) {}
  std::size_t rank() const { return rank_; }

 private:
  std::size_t rank_;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_objective)
      : NumericalError(what), last_objective_(last_objective) {}
  double last_objective() const { return last_objective_; }

 private:
  double last_objective_;
};

}  // namespace xfer

#endif  // XFER_ERROR_HPP_
