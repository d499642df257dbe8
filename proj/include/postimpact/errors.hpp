#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace postimpact {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, std::string reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(std::move(reason)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(std::string id) : Error("duplicate post id: " + id), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus is empty") {}
};

class EmptyBrand : public Error {
 public:
  explicit EmptyBrand(const std::string& name) : Error("brand has no posts: " + name) {}
};

class MissingVocabulary : public Error {
 public:
  MissingVocabulary() : Error("content block enabled without a vocabulary") {}
};

class SingleClassTraining : public Error {
 public:
  SingleClassTraining() : Error("training data must contain both classes") {}
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " + std::to_string(got)) {}
};

class NotSupported : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

class CorruptModelFile : public Error {
 public:
  using Error::Error;
};

class TooFewInstances : public Error {
 public:
  using Error::Error;
};

class UnwritablePath : public Error {
 public:
  explicit UnwritablePath(const std::string& path) : Error("cannot write to " + path) {}
};

class EmptyReport : public Error {
 public:
  EmptyReport() : Error("report has no cells") {}
};

class ModelMissing : public Error {
 public:
  explicit ModelMissing(const std::string& problem) : Error("bundle has no model for problem " + problem) {}
};

class EmptyDraft : public Error {
 public:
  EmptyDraft() : Error("draft text is empty") {}
};

class BindFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace postimpact
