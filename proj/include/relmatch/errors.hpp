#pragma once

#include <stdexcept>
#include <string>

namespace relmatch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- catalog / table loading ---

class MalformedCatalog : public Error {
public:
    using Error::Error;
};

class InvalidCatalog : public Error {
public:
    using Error::Error;
};

class MalformedCsv : public Error {
public:
    using Error::Error;
};

class EmptyTable : public Error {
public:
    using Error::Error;
};

// --- embedding / index ---

class ProviderUnavailable : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class DuplicateId : public Error {
public:
    using Error::Error;
};

class IoFailure : public Error {
public:
    using Error::Error;
};

class CorruptIndex : public Error {
public:
    using Error::Error;
};

// --- classification ---

class InvalidPolicy : public Error {
public:
    using Error::Error;
};

/// The backend reply could not be turned into one verdict per candidate.
/// Carries the raw reply for offline diagnosis.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::string raw_text)
        : Error(message), raw_text_(std::move(raw_text)) {}

    const std::string& raw_text() const { return raw_text_; }

private:
    std::string raw_text_;
};

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

// --- cascade resolution ---

class MissingDistance : public Error {
public:
    using Error::Error;
};

// --- synthetic data generation ---

class InvalidParams : public Error {
public:
    using Error::Error;
};

class UnknownNode : public Error {
public:
    using Error::Error;
};

class MalformedVocabulary : public Error {
public:
    using Error::Error;
};

} // namespace relmatch
