#include "hyquc/error.hpp"

namespace hyquc {

const char *to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Size:
        return "size error";
    case ErrorKind::Index:
        return "index error";
    case ErrorKind::Shape:
        return "shape error";
    case ErrorKind::Argument:
        return "argument error";
    case ErrorKind::Schema:
        return "schema error";
    case ErrorKind::Augmentation:
        return "augmentation error";
    case ErrorKind::Split:
        return "split error";
    case ErrorKind::Format:
        return "format error";
    }
    return "error";
}

} // namespace hyquc
