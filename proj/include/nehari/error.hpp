#pragma once

#include <stdexcept>
#include <string>

namespace nehari {

enum class ErrorKind {
    Overlap,
    Domain,
    Symmetry,
    Size,
    Resolution,
    MeshMismatch,
    Index,
    Dimension,
    Singular,
    RankDeficient,
    BracketInvalid,
    CorrectorFailure,
    MaskMismatch,
    NotASolution,
    Config,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace nehari
