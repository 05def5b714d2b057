#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <wharf/errors.hpp>

namespace wharf {

using VertexId = std::uint32_t;
using WalkId = std::uint32_t;

/// Each pairing operand must fit in this many bits so that the paired value fits 64 bits.
inline constexpr unsigned kOperandBits = 32;
inline constexpr std::uint64_t kOperandLimit = std::uint64_t{1} << kOperandBits;

/// Exact floor(sqrt(z)) for every 64-bit z.
std::uint64_t isqrt(std::uint64_t z) noexcept;

/// Szudzik pairing. Throws OverflowError if an operand is >= 2^32.
std::uint64_t szudzik_pair(std::uint64_t x, std::uint64_t y);

/// Inverse of szudzik_pair; total on 64-bit input.
std::pair<std::uint64_t, std::uint64_t> szudzik_unpair(std::uint64_t z) noexcept;

struct WalkTriplet {
    WalkId walk = 0;
    std::uint32_t position = 0;
    VertexId next = 0;

    friend bool operator==(WalkTriplet const&, WalkTriplet const&) = default;
};

struct EncodedTriplet {
    std::uint64_t value = 0;

    friend auto operator<=>(EncodedTriplet const&, EncodedTriplet const&) = default;
};

/// Packs walk id and position as walk * length + position, then pairs with the next vertex.
EncodedTriplet encode_triplet(WalkTriplet const& t, std::uint32_t walk_length);
WalkTriplet decode_triplet(EncodedTriplet e, std::uint32_t walk_length);

/// Encoded value of (walk, position) paired with `next`; the building block for search ranges.
inline std::uint64_t walk_key(WalkId walk, std::uint32_t position, std::uint32_t walk_length)
{
    return std::uint64_t{walk} * walk_length + position;
}

// ---------------------------------------------------------------------------
// Chunk codec

enum class ChunkCodec : std::uint8_t {
    varint_delta = 0,  // first value relative to base, then gaps, LEB128-style
    raw64 = 1,         // fixed 8-byte little-endian values, no delta
};

struct ChunkBytes {
    std::vector<std::uint8_t> bytes;
    std::size_t count = 0;

    friend bool operator==(ChunkBytes const&, ChunkBytes const&) = default;
};

void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v);

/// Reads one varint starting at `pos`; advances `pos`. Throws CorruptionError when truncated.
std::uint64_t get_varint(std::span<const std::uint8_t> in, std::size_t& pos);

/// Strictly increasing values -> bytes. The first value is stored as (values[0] - base).
ChunkBytes compress_chunk(std::span<const std::uint64_t> values, std::uint64_t base = 0,
                          ChunkCodec codec = ChunkCodec::varint_delta);

std::vector<std::uint64_t> decompress_chunk(ChunkBytes const& c, std::uint64_t base = 0,
                                            ChunkCodec codec = ChunkCodec::varint_delta);

/// Streaming decode. `visit(value)` returns false to stop early.
/// Returns the number of values decoded.
template <class Visit>
std::size_t decode_chunk(std::span<const std::uint8_t> bytes, std::size_t count, std::uint64_t base,
                         ChunkCodec codec, Visit&& visit)
{
    std::size_t pos = 0;
    std::uint64_t cur = base;
    for (std::size_t i = 0; i < count; ++i) {
        if (codec == ChunkCodec::raw64) {
            if (pos + 8 > bytes.size()) {
                throw CorruptionError("truncated raw chunk");
            }
            cur = 0;
            for (int b = 7; b >= 0; --b) {
                cur = (cur << 8) | bytes[pos + b];
            }
            pos += 8;
        } else {
            cur += get_varint(bytes, pos);
        }
        if (!visit(cur)) {
            return i + 1;
        }
    }
    return count;
}

}  // namespace wharf
