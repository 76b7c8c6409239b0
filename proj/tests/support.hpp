#pragma once

#include "delottery/error.hpp"

#include <optional>

namespace test {

// Reason of the ProtocolError thrown by f, or nullopt if it returns.
template <typename F>
std::optional<delottery::Reason> reason_of(F&& f) {
    try {
        f();
    } catch (const delottery::ProtocolError& e) {
        return e.reason();
    }
    return std::nullopt;
}

}  // namespace test
