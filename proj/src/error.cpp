#include "hte/error.hpp"

namespace hte {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonBinaryValue: return "NonBinaryValue";
    case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::NoRegionColumn: return "NoRegionColumn";
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::FeatureAbsent: return "FeatureAbsent";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::AllZeroVariance: return "AllZeroVariance";
    case ErrorCode::ArmEmpty: return "ArmEmpty";
    case ErrorCode::ArmTooSmall: return "ArmTooSmall";
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::Unavailable: return "Unavailable";
    case ErrorCode::DegenerateBins: return "DegenerateBins";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace hte
