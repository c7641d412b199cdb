#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace idea23d {

// Stable 64-bit FNV-1a. Used wherever a hash value feeds deterministic
// behavior (mock backends, seed derivation); std::hash is not stable across
// implementations.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t fnv1a64(const std::string& s);

// splitmix64 step; the de-facto standard seed mixer.
std::uint64_t splitmix64(std::uint64_t& state);

// Combines seed material into a fresh stream seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Small deterministic PRNG (xoshiro-free: splitmix stream is enough here).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }
    // Uniform in [0, 1).
    double next_double();
    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);
    // Standard normal via Box-Muller.
    double next_gaussian();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);  // throws IoError on bad input

// SHA-256 content digest, lowercase hex (64 chars).
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& s);

// Lowercases ASCII letters in place-ish fashion.
std::string to_lower(std::string s);

std::string read_file(const std::string& path);                  // throws IoError
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file(const std::string& path, const std::string& text);

}  // namespace idea23d
