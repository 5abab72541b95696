#pragma once

#include <stdexcept>
#include <string>

namespace waterrpg {

/// Domain error for the watermarking pipeline (codec, embedding, extraction).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace waterrpg
