#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mivs {

/// Malformed or truncated file; carries the byte offset where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Magnitude estimation requested before enough samples have accumulated.
class InsufficientHistory : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No perturbation within the configured search bounds trips the relay.
class NoSolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An attack was applied but the relay did not trip.
class AttackIneffectiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Validation was requested on a stream that never triggered the relay.
class NotTriggeredError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A generated scenario did not trigger the relay; it is rejected, not labeled.
class RejectedScenario : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mivs
