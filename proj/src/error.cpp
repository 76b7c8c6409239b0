#include "delottery/error.hpp"

namespace delottery {

std::string_view reason_name(Reason reason) {
    switch (reason) {
        case Reason::InvalidArgument: return "InvalidArgument";
        case Reason::InvalidConfig: return "InvalidConfig";
        case Reason::UnknownAccount: return "UnknownAccount";
        case Reason::DuplicateAccount: return "DuplicateAccount";
        case Reason::InsufficientBalance: return "InsufficientBalance";
        case Reason::BadAuthTag: return "BadAuthTag";
        case Reason::NotTransactionNode: return "NotTransactionNode";
        case Reason::ClockOrder: return "ClockOrder";
        case Reason::BrokenLink: return "BrokenLink";
        case Reason::WindowNotOpen: return "WindowNotOpen";
        case Reason::WindowClosed: return "WindowClosed";
        case Reason::Duplicate: return "Duplicate";
        case Reason::TransactionNodeForbidden: return "TransactionNodeForbidden";
        case Reason::NoCommitment: return "NoCommitment";
        case Reason::BindingViolation: return "BindingViolation";
        case Reason::AlreadyFinalized: return "AlreadyFinalized";
        case Reason::WrongPhase: return "WrongPhase";
        case Reason::WrongMode: return "WrongMode";
        case Reason::PowFailure: return "PowFailure";
        case Reason::CertificationFailed: return "CertificationFailed";
        case Reason::NotPlayer: return "NotPlayer";
        case Reason::Banned: return "Banned";
        case Reason::GuessOutOfRange: return "GuessOutOfRange";
    }
    return "Unknown";
}

}  // namespace delottery
