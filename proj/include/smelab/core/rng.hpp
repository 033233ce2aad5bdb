#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <variant>

namespace smelab {

using Rng = std::mt19937_64;

using StreamLabel = std::variant<std::string_view, std::uint64_t>;

/**
 * Position in a tree of random streams. A key is the hash of a seed and a path
 * of labels; child() extends the path, so key.child(a).child(b) == key.child({a, b}).
 */
class StreamKey {
public:
    explicit StreamKey(std::uint64_t seed);

    [[nodiscard]] StreamKey child(std::string_view label) const;
    [[nodiscard]] StreamKey child(std::uint64_t index) const;
    [[nodiscard]] StreamKey child(const char* label) const { return child(std::string_view(label)); }
    [[nodiscard]] StreamKey child(int index) const { return child(static_cast<std::uint64_t>(index)); }
    [[nodiscard]] StreamKey child(std::initializer_list<StreamLabel> labels) const;

    [[nodiscard]] std::uint64_t value() const { return state_; }
    [[nodiscard]] Rng rng() const;

    friend bool operator==(const StreamKey&, const StreamKey&) = default;

private:
    struct Raw {};
    StreamKey(Raw, std::uint64_t state) : state_(state) {}
    std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Engine for the stream at `seed` / labels.
Rng derive_stream(std::uint64_t seed, std::initializer_list<StreamLabel> labels);

}  // namespace smelab
