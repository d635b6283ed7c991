#include "diqr/rng.hpp"

#include <cstdio>

namespace diqr {

Seed256 parse_seed(std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    if (hex.size() != 64) throw std::invalid_argument("seed must be 64 hex digits");
    Seed256 out{};
    for (int w = 0; w < 4; ++w) {
        std::uint64_t v = 0;
        for (int k = 0; k < 16; ++k) {
            char c = hex[w * 16 + k];
            int d;
            if (c >= '0' && c <= '9') d = c - '0';
            else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
            else throw std::invalid_argument("seed has a non-hex character");
            v = (v << 4) | static_cast<std::uint64_t>(d);
        }
        out[w] = v;
    }
    return out;
}

std::string seed_to_hex(const Seed256& seed) {
    std::string s;
    char buf[17];
    for (auto w : seed) {
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(w));
        s += buf;
    }
    return s;
}

std::mt19937_64 substream(const Seed256& master, std::string_view label, std::uint64_t index) {
    std::vector<std::uint32_t> material;
    for (auto w : master) {
        material.push_back(static_cast<std::uint32_t>(w >> 32));
        material.push_back(static_cast<std::uint32_t>(w));
    }
    material.push_back(static_cast<std::uint32_t>(label.size()));
    for (unsigned char c : label) material.push_back(c);
    material.push_back(static_cast<std::uint32_t>(index >> 32));
    material.push_back(static_cast<std::uint32_t>(index));
    std::seed_seq seq(material.begin(), material.end());
    return std::mt19937_64(seq);
}

SeedExhausted::SeedExhausted(std::size_t available, std::size_t estimate)
    : std::runtime_error("seed exhausted after " + std::to_string(available) + " bits; about " +
                         std::to_string(estimate) + " bits needed"),
      bits_needed_estimate(estimate) {}

bool EngineBitSource::next_bit() {
    if (left_ == 0) {
        word_ = engine_();
        left_ = 64;
    }
    bool b = word_ & 1u;
    word_ >>= 1;
    --left_;
    ++consumed_;
    return b;
}

bool BufferBitSource::next_bit() {
    if (consumed_ >= bits_.size())
        throw SeedExhausted(bits_.size(), std::max(demand_, bits_.size() + 1));
    return bits_[consumed_++] != 0;
}

std::vector<std::uint8_t> random_bits(std::mt19937_64& engine, std::size_t count) {
    std::vector<std::uint8_t> out(count);
    std::uint64_t w = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 64 == 0) w = engine();
        out[i] = static_cast<std::uint8_t>(w & 1u);
        w >>= 1;
    }
    return out;
}

}  // namespace diqr
