#pragma once

#include <stdexcept>
#include <string>

namespace legalqa {

// Base class for all library errors. Subclasses distinguish validation
// failures (schema, reference, parse) from runtime failures (provider,
// generation, output) so the CLI can map them to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class ReferenceError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ProviderError : public Error {
public:
    using Error::Error;
};

class BudgetError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class OutputError : public Error {
public:
    using Error::Error;
};

}  // namespace legalqa
