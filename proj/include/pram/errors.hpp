#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace pram {

/// 1-based position in a source text (rule DSL, config file).
struct SourcePos {
    int line = 0;
    int column = 0;

    friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

std::string to_string(const SourcePos& pos);

/// Base of every error raised by the library. Errors that originate in a
/// source text carry the offending position.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, std::optional<SourcePos> pos = std::nullopt);

    const std::optional<SourcePos>& position() const noexcept { return pos_; }
    virtual const char* kind() const noexcept { return "Error"; }

private:
    std::optional<SourcePos> pos_;
};

#define PRAM_DEFINE_ERROR(Name)                                                  \
    class Name : public Error {                                                  \
    public:                                                                      \
        using Error::Error;                                                      \
        const char* kind() const noexcept override { return #Name; }             \
    }

PRAM_DEFINE_ERROR(UnknownSiteError);
PRAM_DEFINE_ERROR(EmptySiteError);
PRAM_DEFINE_ERROR(SchemaError);
PRAM_DEFINE_ERROR(ParseError);
PRAM_DEFINE_ERROR(ValidationError);
PRAM_DEFINE_ERROR(ProbabilityRangeError);
PRAM_DEFINE_ERROR(ProbabilitySumError);
PRAM_DEFINE_ERROR(ActionConflictError);
PRAM_DEFINE_ERROR(IoError);

#undef PRAM_DEFINE_ERROR

}  // namespace pram
