#pragma once

#include <stdexcept>
#include <string>

namespace stylo {

// Maps directly onto the CLI exit codes.
enum class ErrorKind : int {
    validation = 2,
    missing_artifact = 3,
    runtime = 4,
};

inline const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::validation: return "validation";
        case ErrorKind::missing_artifact: return "missing_artifact";
        case ErrorKind::runtime: return "runtime";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class MissingArtifactError : public Error {
public:
    explicit MissingArtifactError(const std::string& what) : Error(ErrorKind::missing_artifact, what) {}
};

class RuntimeFailure : public Error {
public:
    explicit RuntimeFailure(const std::string& what) : Error(ErrorKind::runtime, what) {}
};

}  // namespace stylo
