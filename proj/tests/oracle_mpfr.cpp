#include "oracles.hpp"

#include <mpfr.h>


namespace oracle {

std::string deposit(const std::string& s, std::uint64_t num, std::uint64_t den, const std::string& f) {
    constexpr mpfr_prec_t prec = 512;
    mpfr_t k, lnk, ten, price, bal, a, b;
    for (auto* v : {&k, &lnk, &ten, &price, &bal, &a, &b}) mpfr_init2(*v, prec);

    mpfr_set_ui(k, num, MPFR_RNDN);
    mpfr_div_ui(k, k, den, MPFR_RNDN);
    mpfr_log(lnk, k, MPFR_RNDN);
    mpfr_set_ui(ten, 10, MPFR_RNDN);
    mpfr_pow(a, ten, lnk, MPFR_RNDN);
    mpfr_set_str(price, s.c_str(), 10, MPFR_RNDN);
    mpfr_mul(a, a, price, MPFR_RNDN);

    mpfr_set_str(bal, f.c_str(), 10, MPFR_RNDN);
    mpfr_mul_ui(b, bal, den, MPFR_RNDN);
    mpfr_div_ui(b, b, num, MPFR_RNDN);

    mpfr_max(a, a, b, MPFR_RNDN);
    mpfr_floor(a, a);

    char* text = nullptr;
    mpfr_asprintf(&text, "%.0Rf", a);
    std::string out(text);
    mpfr_free_str(text);
    for (auto* v : {&k, &lnk, &ten, &price, &bal, &a, &b}) mpfr_clear(*v);
    return out;
}

}  // namespace oracle
