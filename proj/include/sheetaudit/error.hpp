#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sheetaudit {

/// Base class of every error raised by the workbench library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Workbook ingestion.
class UnreadableFile : public Error {
public:
    using Error::Error;
};

class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

class MalformedWorkbook : public Error {
public:
    using Error::Error;
};

class SheetOutOfRange : public Error {
public:
    using Error::Error;
};

class MalformedAddress : public Error {
public:
    using Error::Error;
};

/// Raised by the formula parser. Both subclasses are recoverable: checkers
/// skip the offending formula and the run records it.
class FormulaError : public Error {
public:
    using Error::Error;
};

class SyntaxError : public FormulaError {
public:
    SyntaxError(std::size_t position, std::string expected)
        : FormulaError("syntax error at position " + std::to_string(position) + ": expected " + expected),
          position_(position),
          expected_(std::move(expected)) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

class UnsupportedConstruct : public FormulaError {
public:
    explicit UnsupportedConstruct(std::string kind)
        : FormulaError("unsupported construct: " + kind), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// A document (scenario, ratings, run) that does not match its json schema.
class InvalidDocument : public Error {
public:
    using Error::Error;
};

class IoFailure : public Error {
public:
    using Error::Error;
};

}  // namespace sheetaudit
