#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace delottery {

// Atomic currency units. 128-bit so that a 1e-12 fee ratio on realistic
// share prices still resolves to whole units.
using Money = unsigned __int128;
using SignedMoney = __int128;

std::string money_to_string(Money value);
std::string signed_money_to_string(SignedMoney value);

// Accepts plain decimal digits with optional '_' separators.
Money parse_money(std::string_view text);
SignedMoney parse_signed_money(std::string_view text);

// Exact rational in lowest terms, used for the deposit security factor.
struct Rational {
    std::uint64_t num = 3;
    std::uint64_t den = 2;

    // Parses "1.5", "3/2" or "2".
    static Rational parse(std::string_view text);
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string to_string() const;

    friend bool operator==(const Rational&, const Rational&) = default;
};

}  // namespace delottery
