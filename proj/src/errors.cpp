#include "hwforest/errors.hpp"

namespace hwforest {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::BadMagic: return "BadMagic";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::RaggedRow: return "RaggedRow";
    case Errc::UnknownLabelColumn: return "UnknownLabelColumn";
    case Errc::NonNumericCell: return "NonNumericCell";
    case Errc::ClassWithSingleInstance: return "ClassWithSingleInstance";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::FoldCountTooSmall: return "FoldCountTooSmall";
    case Errc::WindowLargerThanImage: return "WindowLargerThanImage";
    case Errc::AllLocationsEliminated: return "AllLocationsEliminated";
    case Errc::ZeroTotalMass: return "ZeroTotalMass";
    case Errc::InvalidBounds: return "InvalidBounds";
    case Errc::TooFewInstances: return "TooFewInstances";
    case Errc::BinCountExceedsInstances: return "BinCountExceedsInstances";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegenerateTable: return "DegenerateTable";
    case Errc::EmptyVector: return "EmptyVector";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::BadConfig: return "BadConfig";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

} // namespace hwforest
