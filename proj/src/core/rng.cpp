#include "smelab/core/rng.hpp"

namespace smelab {

namespace {

constexpr std::uint64_t kStringTag = 0x5bd1e9955bd1e995ULL;
constexpr std::uint64_t kIndexTag = 0x9e3779b97f4a7c15ULL;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    // Length is folded in so that prefixes of a label hash differently.
    return h ^ (static_cast<std::uint64_t>(s.size()) * 0xff51afd7ed558ccdULL);
}

std::uint64_t absorb(std::uint64_t state, std::uint64_t word, std::uint64_t tag) {
    return splitmix64(state ^ splitmix64(word ^ tag));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

StreamKey::StreamKey(std::uint64_t seed) : state_(splitmix64(seed ^ 0x243f6a8885a308d3ULL)) {}

StreamKey StreamKey::child(std::string_view label) const {
    return StreamKey(Raw{}, absorb(state_, fnv1a(label), kStringTag));
}

StreamKey StreamKey::child(std::uint64_t index) const {
    return StreamKey(Raw{}, absorb(state_, index, kIndexTag));
}

StreamKey StreamKey::child(std::initializer_list<StreamLabel> labels) const {
    StreamKey key = *this;
    for (const auto& label : labels) {
        key = std::visit([&](const auto& v) { return key.child(v); }, label);
    }
    return key;
}

Rng StreamKey::rng() const { return Rng(splitmix64(state_)); }

Rng derive_stream(std::uint64_t seed, std::initializer_list<StreamLabel> labels) {
    return StreamKey(seed).child(labels).rng();
}

}  // namespace smelab
