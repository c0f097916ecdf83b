#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace timeqa {

/// Base of every error raised by the toolkit. Stage code catches this to map
/// failures onto CLI exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- ingest ---------------------------------------------------------------

class SchemaViolation : public Error {
public:
    SchemaViolation(std::size_t record_index, const std::string& what)
        : Error("record " + std::to_string(record_index) + ": " + what), record_index_(record_index) {}
    std::size_t record_index() const noexcept { return record_index_; }

private:
    std::size_t record_index_;
};

class TemporalInconsistency : public Error {
public:
    TemporalInconsistency(std::size_t record_index, const std::string& what)
        : Error("record " + std::to_string(record_index) + ": " + what), record_index_(record_index) {}
    std::size_t record_index() const noexcept { return record_index_; }

private:
    std::size_t record_index_;
};

class EmptyCorpus : public Error {
public:
    using Error::Error;
};

// ---- taskgen / qagen ------------------------------------------------------

class DegenerateTrack : public Error {
public:
    using Error::Error;
};

class UnresolvedPlaceholder : public Error {
public:
    explicit UnresolvedPlaceholder(const std::string& name)
        : Error("unresolved placeholder {" + name + "}"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class InsufficientDistractors : public Error {
public:
    using Error::Error;
};

class FormatMismatch : public Error {
public:
    using Error::Error;
};

// ---- manifests ------------------------------------------------------------

class InvalidManifest : public Error {
public:
    using Error::Error;
};

class UnsupportedOperation : public Error {
public:
    using Error::Error;
};

// ---- judges / mtp / audit -------------------------------------------------

class JudgeUnavailable : public Error {
public:
    using Error::Error;
};

class UnparseableVerdict : public Error {
public:
    using Error::Error;
};

class TooFewFrames : public Error {
public:
    using Error::Error;
};

class SelfPartner : public Error {
public:
    using Error::Error;
};

class IncompleteVerdicts : public Error {
public:
    using Error::Error;
};

// ---- evaluation -----------------------------------------------------------

class UnknownItemId : public Error {
public:
    explicit UnknownItemId(const std::string& id) : Error("unknown item_id: " + id), id_(id) {}
    const std::string& item_id() const noexcept { return id_; }

private:
    std::string id_;
};

// ---- pipeline -------------------------------------------------------------

class ConfigInvalid : public Error {
public:
    using Error::Error;
};

/// A stage input is missing or its content hash disagrees with the run manifest.
class MissingDependency : public Error {
public:
    using Error::Error;
};

}  // namespace timeqa
