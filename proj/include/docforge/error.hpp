#pragma once

#include <stdexcept>
#include <string>

namespace docforge {

/// Error taxonomy shared by the library and the CLI exit-code mapping.
enum class ErrorKind {
    config,      // bad configuration / flags
    io,          // missing or unreadable inputs
    validation,  // structurally invalid data (ontology, vocab, spans, ...)
    invalid_input,
    empty_store,
    invalid_vocab,
    overlap,
    sampling,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};
struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};
struct InvalidInput : Error {
    explicit InvalidInput(const std::string& what) : Error(ErrorKind::invalid_input, what) {}
};
struct EmptyStore : Error {
    explicit EmptyStore(const std::string& what) : Error(ErrorKind::empty_store, what) {}
};
struct InvalidVocab : Error {
    explicit InvalidVocab(const std::string& what) : Error(ErrorKind::invalid_vocab, what) {}
};
struct OverlapError : Error {
    explicit OverlapError(const std::string& what) : Error(ErrorKind::overlap, what) {}
};
struct SamplingError : Error {
    explicit SamplingError(const std::string& what) : Error(ErrorKind::sampling, what) {}
};

}  // namespace docforge
