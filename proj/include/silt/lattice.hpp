#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "silt/rng.hpp"

namespace silt {

/// A point of Z^1 or Z^2. One-dimensional sites keep y == 0.
struct Site {
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend constexpr Site operator+(Site a, Site b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Site operator-(Site a, Site b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Site operator-(Site a) noexcept { return {-a.x, -a.y}; }
    friend constexpr auto operator<=>(const Site&, const Site&) = default;
};

/// Packs a site into one 64-bit key. In d = 1 the key is the coordinate
/// itself; in d = 2 each coordinate must fit in 32 bits.
inline std::uint64_t pack_site(Site s, int dimension) {
    if (dimension == 1) return static_cast<std::uint64_t>(s.x);
    if (s.x < INT32_MIN || s.x > INT32_MAX || s.y < INT32_MIN || s.y > INT32_MAX)
        throw std::overflow_error("site coordinate exceeds 32 bits in a 2-d key");
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.x)) << 32) |
           static_cast<std::uint32_t>(s.y);
}

inline Site unpack_site(std::uint64_t key, int dimension) {
    if (dimension == 1) return {static_cast<std::int64_t>(key), 0};
    return {static_cast<std::int32_t>(key >> 32), static_cast<std::int32_t>(key & 0xffffffffULL)};
}

/// Open-addressing (linear probing) map from packed site keys to visit
/// counts. Capacity is a power of two and load stays below one half.
class OccupationMap {
public:
    struct Entry {
        std::uint64_t key;
        std::uint64_t count;
    };

    explicit OccupationMap(std::size_t expected = 16) { rehash(capacity_for(expected)); }

    /// Adds one visit and returns the count before the visit.
    std::uint64_t increment(std::uint64_t key) {
        if (2 * (size_ + 1) > slots_.size()) rehash(2 * slots_.size());
        Slot& slot = find_slot(key);
        if (!slot.used) {
            slot = {key, 0, true};
            ++size_;
        }
        return slot.count++;
    }

    std::uint64_t count(std::uint64_t key) const {
        const std::size_t mask = slots_.size() - 1;
        for (std::size_t i = mix64(key) & mask;; i = (i + 1) & mask) {
            const Slot& slot = slots_[i];
            if (!slot.used) return 0;
            if (slot.key == key) return slot.count;
        }
    }

    std::size_t size() const noexcept { return size_; }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (const Slot& slot : slots_)
            if (slot.used) fn(slot.key, slot.count);
    }

    /// Entries sorted by key; a canonical order for deterministic reductions.
    std::vector<Entry> sorted_entries() const;

private:
    struct Slot {
        std::uint64_t key = 0;
        std::uint64_t count = 0;
        bool used = false;
    };

    static std::size_t capacity_for(std::size_t expected) {
        std::size_t cap = 16;
        while (cap < 2 * expected) cap <<= 1;
        return cap;
    }

    Slot& find_slot(std::uint64_t key) {
        const std::size_t mask = slots_.size() - 1;
        for (std::size_t i = mix64(key) & mask;; i = (i + 1) & mask) {
            Slot& slot = slots_[i];
            if (!slot.used || slot.key == key) return slot;
        }
    }

    void rehash(std::size_t capacity);

    std::vector<Slot> slots_;
    std::size_t size_ = 0;
};

}  // namespace silt
