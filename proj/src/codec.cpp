#include <wharf/codec.hpp>

#include <cmath>
#include <string>

namespace wharf {

std::uint64_t isqrt(std::uint64_t z) noexcept
{
    constexpr std::uint64_t kMaxRoot = 0xFFFFFFFFull;
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(z)));
    if (r > kMaxRoot) {
        r = kMaxRoot;
    }
    while (r * r > z) {
        --r;
    }
    while (r < kMaxRoot && (r + 1) * (r + 1) <= z) {
        ++r;
    }
    return r;
}

std::uint64_t szudzik_pair(std::uint64_t x, std::uint64_t y)
{
    if (x >= kOperandLimit || y >= kOperandLimit) {
        throw OverflowError("szudzik operand exceeds 32 bits: (" + std::to_string(x) + ", " +
                            std::to_string(y) + ")");
    }
    return x < y ? y * y + x : x * x + x + y;
}

std::pair<std::uint64_t, std::uint64_t> szudzik_unpair(std::uint64_t z) noexcept
{
    std::uint64_t const s = isqrt(z);
    std::uint64_t const rest = z - s * s;
    if (rest < s) {
        return {rest, s};
    }
    return {s, rest - s};
}

EncodedTriplet encode_triplet(WalkTriplet const& t, std::uint32_t walk_length)
{
    if (walk_length == 0) {
        throw ContractError("walk length must be positive");
    }
    if (t.position >= walk_length) {
        throw ContractError("triplet position " + std::to_string(t.position) +
                            " outside walk length " + std::to_string(walk_length));
    }
    std::uint64_t const f = walk_key(t.walk, t.position, walk_length);
    if (f >= kOperandLimit) {
        throw OverflowError("walk " + std::to_string(t.walk) + " position " +
                            std::to_string(t.position) + " overflows 32-bit walk key");
    }
    return EncodedTriplet{szudzik_pair(f, t.next)};
}

WalkTriplet decode_triplet(EncodedTriplet e, std::uint32_t walk_length)
{
    if (walk_length == 0) {
        throw ContractError("walk length must be positive");
    }
    auto const [f, next] = szudzik_unpair(e.value);
    return WalkTriplet{static_cast<WalkId>(f / walk_length),
                       static_cast<std::uint32_t>(f % walk_length), static_cast<VertexId>(next)};
}

void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    while (v >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(v | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t get_varint(std::span<const std::uint8_t> in, std::size_t& pos)
{
    std::uint64_t v = 0;
    for (unsigned shift = 0; shift < 64; shift += 7) {
        if (pos >= in.size()) {
            throw CorruptionError("truncated varint at byte " + std::to_string(pos));
        }
        std::uint8_t const byte = in[pos++];
        v |= std::uint64_t{byte & 0x7Fu} << shift;
        if ((byte & 0x80) == 0) {
            return v;
        }
    }
    throw CorruptionError("varint longer than 10 bytes");
}

ChunkBytes compress_chunk(std::span<const std::uint64_t> values, std::uint64_t base, ChunkCodec codec)
{
    ChunkBytes out;
    out.count = values.size();
    if (values.empty()) {
        return out;
    }
    if (values.front() < base) {
        throw ContractError("chunk value below its base");
    }
    if (codec == ChunkCodec::raw64) {
        out.bytes.reserve(values.size() * 8);
    } else {
        out.bytes.reserve(values.size() * 4);
    }
    std::uint64_t prev = base;
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t const v = values[i];
        if (i > 0 && v <= prev) {
            throw ContractError("chunk input is not strictly increasing at index " + std::to_string(i));
        }
        if (codec == ChunkCodec::raw64) {
            for (int b = 0; b < 8; ++b) {
                out.bytes.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
            }
        } else {
            put_varint(out.bytes, v - prev);
        }
        prev = v;
    }
    return out;
}

std::vector<std::uint64_t> decompress_chunk(ChunkBytes const& c, std::uint64_t base, ChunkCodec codec)
{
    std::vector<std::uint64_t> out;
    out.reserve(c.count);
    std::size_t const consumed = [&] {
        std::size_t pos = 0;
        std::uint64_t cur = base;
        for (std::size_t i = 0; i < c.count; ++i) {
            if (codec == ChunkCodec::raw64) {
                if (pos + 8 > c.bytes.size()) {
                    throw CorruptionError("truncated raw chunk");
                }
                cur = 0;
                for (int b = 7; b >= 0; --b) {
                    cur = (cur << 8) | c.bytes[pos + b];
                }
                pos += 8;
            } else {
                cur += get_varint(c.bytes, pos);
            }
            out.push_back(cur);
        }
        return pos;
    }();
    if (consumed != c.bytes.size()) {
        throw CorruptionError("chunk has " + std::to_string(c.bytes.size() - consumed) +
                              " trailing bytes");
    }
    return out;
}

}  // namespace wharf
