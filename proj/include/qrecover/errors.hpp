#pragma once

#include <stdexcept>
#include <string>

namespace qrecover {

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ArityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IndexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EncodingError : std::runtime_error {
    enum class Kind { ZeroNorm, Overflow };
    Kind kind;
    EncodingError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct ChannelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyBatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SplitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateVariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ProtocolMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CSV ingestion errors carry enough context to point at the offending cell.
struct EmptyFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingColumn : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonNumericCell : std::runtime_error {
    std::size_t row, col;
    NonNumericCell(std::size_t r, std::size_t c, const std::string& msg)
        : std::runtime_error(msg), row(r), col(c) {}
};
struct MissingFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qrecover
