#include <ixframe/error.hpp>

namespace ixframe {

auto to_string(ErrorCode code) -> std::string_view {
    switch (code) {
        case ErrorCode::kRowTooLarge: return "RowTooLarge";
        case ErrorCode::kTypeMismatch: return "TypeMismatch";
        case ErrorCode::kCorruptPayload: return "CorruptPayload";
        case ErrorCode::kFieldOverflow: return "FieldOverflow";
        case ErrorCode::kBatchFull: return "BatchFull";
        case ErrorCode::kBatchSealed: return "BatchSealed";
        case ErrorCode::kOutOfBounds: return "OutOfBounds";
        case ErrorCode::kInvalidSchema: return "InvalidSchema";
        case ErrorCode::kPartitionSealed: return "PartitionSealed";
        case ErrorCode::kEmptySchema: return "EmptySchema";
        case ErrorCode::kUnsupportedColumn: return "UnsupportedColumn";
        case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
        case ErrorCode::kUnresolvedColumn: return "UnresolvedColumn";
        case ErrorCode::kInvalidPlan: return "InvalidPlan";
        case ErrorCode::kExecFailure: return "ExecFailure";
        case ErrorCode::kNoSurvivingExecutor: return "NoSurvivingExecutor";
        case ErrorCode::kTaskFailed: return "TaskFailed";
        case ErrorCode::kCorruptLog: return "CorruptLog";
        case ErrorCode::kInvalidSpec: return "InvalidSpec";
        case ErrorCode::kParseError: return "ParseError";
        case ErrorCode::kIoError: return "IoError";
        case ErrorCode::kOOMGuard: return "OOMGuard";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace ixframe
