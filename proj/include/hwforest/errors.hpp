#pragma once

#include <stdexcept>
#include <string>

namespace hwforest {

/// Failure categories surfaced by the library. Each maps to one named
/// error condition of the public operations.
enum class Errc {
    BadMagic,
    CountMismatch,
    TruncatedFile,
    RaggedRow,
    UnknownLabelColumn,
    NonNumericCell,
    ClassWithSingleInstance,
    EmptyDataset,
    DimensionMismatch,
    FoldCountTooSmall,
    WindowLargerThanImage,
    AllLocationsEliminated,
    ZeroTotalMass,
    InvalidBounds,
    TooFewInstances,
    BinCountExceedsInstances,
    EmptyTrainingSet,
    ShapeMismatch,
    ZeroVariance,
    LengthMismatch,
    DegenerateTable,
    EmptyVector,
    OutOfRange,
    BadConfig,
    Io,
};

const char* errc_name(Errc c);

/// Exception carrying a typed error code plus a human-readable message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace hwforest
