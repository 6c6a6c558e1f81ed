// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace occ {

enum class ErrorKind {
    InvalidArgument,
    BehindCamera,
    EmptySupport,
    NumericFailure,
    Parse,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base class for every error raised by the library. The kind is stable and
/// machine-readable; the CLI reports it verbatim.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

class BehindCamera : public Error {
public:
    explicit BehindCamera(const std::string& what) : Error(ErrorKind::BehindCamera, what) {}
};

class EmptySupport : public Error {
public:
    explicit EmptySupport(const std::string& what) : Error(ErrorKind::EmptySupport, what) {}
};

class NumericFailure : public Error {
public:
    explicit NumericFailure(const std::string& what) : Error(ErrorKind::NumericFailure, what) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidArgument(message);
}

}  // namespace occ
