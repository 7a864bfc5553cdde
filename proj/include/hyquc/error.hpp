#pragma once

#include <stdexcept>
#include <string>

namespace hyquc {

enum class ErrorKind {
    Size,
    Index,
    Shape,
    Argument,
    Schema,
    Augmentation,
    Split,
    Format,
};

const char *to_string(ErrorKind kind) noexcept;

/// Base for every failure raised by the library. The kind mirrors the
/// error categories callers are expected to branch on.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define HYQUC_DEFINE_ERROR(Name, Kind)                                          \
    class Name : public Error {                                                 \
    public:                                                                     \
        explicit Name(const std::string &what) : Error(ErrorKind::Kind, what) {} \
    }

HYQUC_DEFINE_ERROR(SizeError, Size);
HYQUC_DEFINE_ERROR(IndexError, Index);
HYQUC_DEFINE_ERROR(ShapeError, Shape);
HYQUC_DEFINE_ERROR(ArgumentError, Argument);
HYQUC_DEFINE_ERROR(SchemaError, Schema);
HYQUC_DEFINE_ERROR(AugmentationError, Augmentation);
HYQUC_DEFINE_ERROR(SplitError, Split);
HYQUC_DEFINE_ERROR(FormatError, Format);

#undef HYQUC_DEFINE_ERROR

} // namespace hyquc
