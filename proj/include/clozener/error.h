/* Copyright 2026 The Clozener Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CLOZENER_ERROR_H_
#define CLOZENER_ERROR_H_

#include <stdexcept>
#include <string>

namespace clozener {

// Base for every error the engine raises. Subclasses only refine the kind so
// callers (mostly the CLI) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (corpus lines, JSON documents).
class ParseError : public Error {
 public:
  using Error::Error;
};

// A caller passed an argument outside the operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A structured input failed a semantic check (lexicon, fixtures, templates).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Span indices outside their sentence.
class RangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Template cannot be rendered for the requested prompt mode.
class UnsupportedTemplateError : public Error {
 public:
  using Error::Error;
};

// Failures reaching or talking to a fill-mask backend.
class BackendError : public Error {
 public:
  using Error::Error;
};

class BackendUnavailableError : public BackendError {
 public:
  using BackendError::BackendError;
};

class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

class MissingFixtureError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace clozener

#endif  // CLOZENER_ERROR_H_
