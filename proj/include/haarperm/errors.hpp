#ifndef HAARPERM_ERRORS_HPP
#define HAARPERM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace haarperm {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid algorithm parameter (A < 1, K < 1, slot overflow, ...).
struct ParamError : Error {
    using Error::Error;
};

/// Input fails structural validation (injectivity, universe bounds, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// An interval is outside the domain of a map or universe in context.
struct DomainError : Error {
    using Error::Error;
};

/// A checked hypothesis of a lemma fails on the given input.
struct HypothesisError : Error {
    using Error::Error;
};

/// Malformed input artifact (JSON shape, rational syntax, ...).
struct ParseError : Error {
    using Error::Error;
};

} // namespace haarperm

#endif
