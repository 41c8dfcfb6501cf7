#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace clausewise {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schema document problems. `location` is a JSON pointer into the document.
class SchemaError : public Error {
 public:
  enum class Kind { Malformed, DuplicateTable, DuplicateColumn, DanglingForeignKey, UnknownReadableName, UnknownEntity };

  SchemaError(Kind kind, std::string location, const std::string& message)
      : Error(message + " (at " + location + ")"), kind_(kind), location_(std::move(location)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& location() const noexcept { return location_; }

 private:
  Kind kind_;
  std::string location_;
};

class SqlSyntaxError : public Error {
 public:
  SqlSyntaxError(std::size_t position, std::vector<std::string> expected, const std::string& found);

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

/// A column or table reference that does not resolve against the schema.
class ResolutionError : public Error {
 public:
  ResolutionError(std::string entity, const std::string& message) : Error(message), entity_(std::move(entity)) {}
  const std::string& entity() const noexcept { return entity_; }

 private:
  std::string entity_;
};

class ExplainError : public Error {
 public:
  using Error::Error;
};

/// Raised by direct transformation when an atomic edit cannot be applied.
class EditError : public Error {
 public:
  enum class Kind { NotSelectClause, EmptySelect, TargetNotFound, InvalidResult };
  EditError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class GenerationError : public Error {
 public:
  enum class Kind { Unclassifiable, UnboundEntity, Unparseable, BackendTimeout, BackendFailure, InvalidOutput };
  GenerationError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }
  bool retryable() const noexcept { return kind_ == Kind::BackendTimeout || kind_ == Kind::BackendFailure; }

 private:
  Kind kind_;
};

class ComposeError : public Error {
 public:
  enum class Kind { EmptyTree, MissingSelect, Unjoinable, Structure };
  ComposeError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  ComposeError(std::string from_table, std::string to_table)
      : Error("no foreign-key path joins table '" + from_table + "' and table '" + to_table + "'"),
        kind_(Kind::Unjoinable),
        tables_{std::move(from_table), std::move(to_table)} {}

  Kind kind() const noexcept { return kind_; }
  /// Both table names, for Unjoinable errors.
  const std::vector<std::string>& tables() const noexcept { return tables_; }

 private:
  Kind kind_;
  std::vector<std::string> tables_;
};

/// A refinement step that could not be turned into a clause. `step` is 1-based;
/// `stage` is "edit", "generation", "structure" or "compose".
class StepError : public Error {
 public:
  StepError(std::size_t step, std::string stage, const std::string& message, bool retryable = false)
      : Error(step ? "step " + std::to_string(step) + ": " + message : message),
        step_(step),
        stage_(std::move(stage)),
        retryable_(retryable) {}

  std::size_t step() const noexcept { return step_; }
  const std::string& stage() const noexcept { return stage_; }
  bool retryable() const noexcept { return retryable_; }

 private:
  std::size_t step_;
  std::string stage_;
  bool retryable_;
};

}  // namespace clausewise
