// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/error.hpp"

#include <utility>

namespace atlas {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

RangeError::RangeError(std::string field, const std::string& message)
    : Error(message), field_(std::move(field)) {}

}  // namespace atlas
