#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace diqr {

using Seed256 = std::array<std::uint64_t, 4>;

// Parses 64 hex digits (an optional 0x prefix is accepted).
Seed256 parse_seed(std::string_view hex);
std::string seed_to_hex(const Seed256& seed);

// Independent generator for (label, index); distinct labels never share a stream.
std::mt19937_64 substream(const Seed256& master, std::string_view label, std::uint64_t index = 0);

struct SeedExhausted : std::runtime_error {
    std::size_t bits_needed_estimate;
    SeedExhausted(std::size_t available, std::size_t estimate);
};

// Uniform bit supply with a consumption counter.
class BitSource {
public:
    virtual ~BitSource() = default;
    virtual bool next_bit() = 0;
    std::size_t consumed() const { return consumed_; }

protected:
    std::size_t consumed_ = 0;
};

class EngineBitSource final : public BitSource {
public:
    explicit EngineBitSource(std::mt19937_64 engine) : engine_(std::move(engine)) {}
    bool next_bit() override;

private:
    std::mt19937_64 engine_;
    std::uint64_t word_ = 0;
    int left_ = 0;
};

// Finite seed string; reading past the end throws SeedExhausted.
class BufferBitSource final : public BitSource {
public:
    explicit BufferBitSource(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}
    bool next_bit() override;
    std::size_t remaining() const { return bits_.size() - consumed_; }
    // Rescales the exhaustion estimate when the caller knows the total demand.
    void set_demand_estimate(std::size_t estimate) { demand_ = estimate; }

private:
    std::vector<std::uint8_t> bits_;
    std::size_t demand_ = 0;
};

std::vector<std::uint8_t> random_bits(std::mt19937_64& engine, std::size_t count);

}  // namespace diqr
