#include "delottery/money.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace delottery {

std::string money_to_string(Money value) {
    if (value == 0) return "0";
    std::string out;
    while (value != 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
        value /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string signed_money_to_string(SignedMoney value) {
    if (value < 0) {
        return "-" + money_to_string(static_cast<Money>(-(value + 1)) + 1);
    }
    return money_to_string(static_cast<Money>(value));
}

Money parse_money(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty money value");
    constexpr Money kMax = ~Money{0};
    Money out = 0;
    bool any = false;
    for (char c : text) {
        if (c == '_') continue;
        if (c < '0' || c > '9') {
            throw std::invalid_argument("invalid money value '" + std::string(text) + "'");
        }
        auto digit = static_cast<Money>(c - '0');
        if (out > (kMax - digit) / 10) {
            throw std::out_of_range("money value overflows 128 bits");
        }
        out = out * 10 + digit;
        any = true;
    }
    if (!any) throw std::invalid_argument("invalid money value '" + std::string(text) + "'");
    return out;
}

SignedMoney parse_signed_money(std::string_view text) {
    if (!text.empty() && text.front() == '-') {
        return -static_cast<SignedMoney>(parse_money(text.substr(1)));
    }
    return static_cast<SignedMoney>(parse_money(text));
}

Rational Rational::parse(std::string_view text) {
    auto fail = [&] { return std::invalid_argument("invalid rational '" + std::string(text) + "'"); };
    auto parse_u64 = [&](std::string_view digits) {
        if (digits.empty() || digits.size() > 18) throw fail();
        std::uint64_t v = 0;
        for (char c : digits) {
            if (c < '0' || c > '9') throw fail();
            v = v * 10 + static_cast<std::uint64_t>(c - '0');
        }
        return v;
    };

    Rational r;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        r.num = parse_u64(text.substr(0, slash));
        r.den = parse_u64(text.substr(slash + 1));
    } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
        auto whole = text.substr(0, dot);
        auto frac = text.substr(dot + 1);
        if (frac.empty() || whole.size() + frac.size() > 18) throw fail();
        r.den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) r.den *= 10;
        r.num = (whole.empty() ? 0 : parse_u64(whole)) * r.den + parse_u64(frac);
    } else {
        r.num = parse_u64(text);
        r.den = 1;
    }
    if (r.den == 0) throw fail();
    auto g = std::gcd(r.num, r.den);
    if (g > 1) {
        r.num /= g;
        r.den /= g;
    }
    return r;
}

std::string Rational::to_string() const {
    return std::to_string(num) + "/" + std::to_string(den);
}

}  // namespace delottery
