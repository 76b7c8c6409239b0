#include "delottery/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace delottery {

namespace {

const EVP_MD* sha3_md() {
    static const EVP_MD* md = EVP_sha3_256();
    return md;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

struct Hasher::Ctx {
    EVP_MD_CTX* md = nullptr;
    Ctx() : md(EVP_MD_CTX_new()) {
        if (md == nullptr || EVP_DigestInit_ex(md, sha3_md(), nullptr) != 1) {
            throw std::runtime_error("sha3: context init failed");
        }
    }
    ~Ctx() { EVP_MD_CTX_free(md); }
    Ctx(const Ctx&) = delete;
    Ctx& operator=(const Ctx&) = delete;
};

Hasher::Hasher() : ctx_(std::make_unique<Ctx>()) {}

Hasher::Hasher(const Hasher& other) : ctx_(std::make_unique<Ctx>()) {
    if (EVP_MD_CTX_copy_ex(ctx_->md, other.ctx_->md) != 1) {
        throw std::runtime_error("sha3: context copy failed");
    }
}

Hasher& Hasher::operator=(const Hasher& other) {
    if (this != &other) {
        Hasher copy(other);
        *this = std::move(copy);
    }
    return *this;
}

Hasher::Hasher(Hasher&&) noexcept = default;
Hasher& Hasher::operator=(Hasher&&) noexcept = default;
Hasher::~Hasher() = default;

Hasher& Hasher::update(std::span<const std::uint8_t> data) {
    if (!data.empty()) {
        EVP_DigestUpdate(ctx_->md, data.data(), data.size());
    }
    return *this;
}

Hasher& Hasher::update(std::string_view text) {
    if (!text.empty()) {
        EVP_DigestUpdate(ctx_->md, text.data(), text.size());
    }
    return *this;
}

Hasher& Hasher::update_u64(std::uint64_t value) {
    std::array<std::uint8_t, 8> buf{};
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(value >> (8 * i));
    return update(buf);
}

Hash256 Hasher::finish() {
    Hash256 out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_->md, out.data(), &len) != 1 || len != out.size()) {
        throw std::runtime_error("sha3: finalize failed");
    }
    return out;
}

Hash256 sha3(std::span<const std::uint8_t> data) {
    Hash256 out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, sha3_md(), nullptr) != 1) {
        throw std::runtime_error("sha3: digest failed");
    }
    return out;
}

Hash256 sha3(std::string_view text) {
    return sha3(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string to_hex(std::span<const std::uint8_t> data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Hash256 hash_from_hex(std::string_view hex) {
    if (hex.size() != 64) {
        throw std::invalid_argument("expected 64 hex digits, got " + std::to_string(hex.size()));
    }
    Hash256 out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

void put_u64(Bytes& out, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

void put_u128(Bytes& out, unsigned __int128 value) {
    for (int i = 0; i < 16; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

void put_bytes(Bytes& out, std::span<const std::uint8_t> data) {
    out.insert(out.end(), data.begin(), data.end());
}

std::array<std::uint8_t, 8> encode_i64(std::int64_t value) {
    auto bits = static_cast<std::uint64_t>(value);
    std::array<std::uint8_t, 8> out{};
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(bits >> (8 * i));
    return out;
}

std::uint64_t mod_be(const Hash256& h, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("mod_be: zero modulus");
    unsigned __int128 acc = 0;
    for (auto b : h) acc = ((acc << 8) | b) % n;
    return static_cast<std::uint64_t>(acc);
}

}  // namespace delottery
