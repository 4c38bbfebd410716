#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ixframe {

enum class ErrorCode {
    // rowstore
    kRowTooLarge,
    kTypeMismatch,
    kCorruptPayload,
    kFieldOverflow,
    kBatchFull,
    kBatchSealed,
    kOutOfBounds,
    // schema / partition / dataframe
    kInvalidSchema,
    kPartitionSealed,
    kEmptySchema,
    kUnsupportedColumn,
    kSchemaMismatch,
    // engine
    kUnresolvedColumn,
    kInvalidPlan,
    kExecFailure,
    // cluster
    kNoSurvivingExecutor,
    kTaskFailed,
    kCorruptLog,
    // datagen / io / cli
    kInvalidSpec,
    kParseError,
    kIoError,
    kOOMGuard,
};

auto to_string(ErrorCode code) -> std::string_view;

/// Every failure raised by the library carries one of the codes above. The
/// message is a single human-readable line.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] auto code() const noexcept -> ErrorCode { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace ixframe
