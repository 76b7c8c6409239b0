#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace delottery {

enum class Reason {
    InvalidArgument,
    InvalidConfig,
    UnknownAccount,
    DuplicateAccount,
    InsufficientBalance,
    BadAuthTag,
    NotTransactionNode,
    ClockOrder,
    BrokenLink,
    WindowNotOpen,
    WindowClosed,
    Duplicate,
    TransactionNodeForbidden,
    NoCommitment,
    BindingViolation,
    AlreadyFinalized,
    WrongPhase,
    WrongMode,
    PowFailure,
    CertificationFailed,
    NotPlayer,
    Banned,
    GuessOutOfRange,
};

std::string_view reason_name(Reason reason);

// A rejected protocol call. State is unchanged when this is thrown.
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(Reason reason, const std::string& detail)
        : std::runtime_error(std::string(reason_name(reason)) + ": " + detail), reason_(reason) {}

    Reason reason() const noexcept { return reason_; }

private:
    Reason reason_;
};

}  // namespace delottery
