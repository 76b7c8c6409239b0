#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace delottery {

using Bytes = std::vector<std::uint8_t>;
using Hash256 = std::array<std::uint8_t, 32>;

// SHA3-256 over one buffer.
Hash256 sha3(std::span<const std::uint8_t> data);
Hash256 sha3(std::string_view text);

// Incremental SHA3-256. Copyable so a common prefix can be absorbed once
// and then forked (used by the nonce search).
class Hasher {
public:
    Hasher();
    Hasher(const Hasher& other);
    Hasher& operator=(const Hasher& other);
    Hasher(Hasher&&) noexcept;
    Hasher& operator=(Hasher&&) noexcept;
    ~Hasher();

    Hasher& update(std::span<const std::uint8_t> data);
    Hasher& update(std::string_view text);
    Hasher& update_u64(std::uint64_t value);  // little-endian
    Hash256 finish();

private:
    struct Ctx;
    std::unique_ptr<Ctx> ctx_;
};

std::string to_hex(std::span<const std::uint8_t> data);
Hash256 hash_from_hex(std::string_view hex);

// Byte encoding helpers; all multi-byte integers are little-endian.
void put_u64(Bytes& out, std::uint64_t value);
void put_u128(Bytes& out, unsigned __int128 value);
void put_bytes(Bytes& out, std::span<const std::uint8_t> data);
std::array<std::uint8_t, 8> encode_i64(std::int64_t value);

// Big-endian 256-bit value of `h` reduced modulo n (n >= 1).
std::uint64_t mod_be(const Hash256& h, std::uint64_t n);

}  // namespace delottery
