#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sheetaudit::detail {

/// FNV-1a, 64 bit. Identifies content; not a security primitive.
class Fingerprint {
public:
    Fingerprint& add(std::string_view bytes) {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
        // Field separator so that ("ab","c") and ("a","bc") differ.
        state_ ^= 0xff;
        state_ *= 0x100000001b3ULL;
        return *this;
    }

    std::string hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = state_;
        for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        return out;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace sheetaudit::detail
