#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lucie {

// Base for all library errors. `code()` is a stable machine-readable tag,
// `what()` is "<code>: <detail>".
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define LUCIE_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                         \
    public:                                                             \
        explicit Name(const std::string& detail) : Error(#Name, detail) {} \
    }

LUCIE_DEFINE_ERROR(UnsupportedArchiveFormat);
LUCIE_DEFINE_ERROR(BudgetExceeded);
LUCIE_DEFINE_ERROR(CorruptArchive);
LUCIE_DEFINE_ERROR(EmptyInput);
LUCIE_DEFINE_ERROR(PipelineFailure);
LUCIE_DEFINE_ERROR(NetworkError);
LUCIE_DEFINE_ERROR(SizeLimitExceeded);
LUCIE_DEFINE_ERROR(EmptyBody);
LUCIE_DEFINE_ERROR(NoDownloadLink);
LUCIE_DEFINE_ERROR(OfflineMiss);

#undef LUCIE_DEFINE_ERROR

} // namespace lucie
