#include <wharf/models.hpp>

#include <cmath>

namespace wharf {

WalkModel WalkModel::node2vec(double p, double q)
{
    WalkModel m;
    m.kind = ModelKind::node2vec;
    m.p = p;
    m.q = q;
    m.validate();
    return m;
}

WalkModel WalkModel::ppr(double alpha)
{
    WalkModel m;
    m.kind = ModelKind::ppr;
    m.alpha = alpha;
    m.validate();
    return m;
}

void WalkModel::validate() const
{
    if (kind == ModelKind::node2vec && !(p > 0 && q > 0 && std::isfinite(p) && std::isfinite(q))) {
        throw ContractError("node2vec needs finite p > 0 and q > 0");
    }
    if (kind == ModelKind::ppr && !(alpha > 0 && alpha < 1)) {
        throw ContractError("ppr needs 0 < alpha < 1");
    }
}

std::string WalkModel::name() const
{
    switch (kind) {
    case ModelKind::deepwalk: return "deepwalk";
    case ModelKind::node2vec: return "node2vec";
    case ModelKind::ppr: return "ppr";
    }
    return "?";
}

ModelKind parse_model_kind(std::string const& s)
{
    if (s == "deepwalk") {
        return ModelKind::deepwalk;
    }
    if (s == "node2vec") {
        return ModelKind::node2vec;
    }
    if (s == "ppr") {
        return ModelKind::ppr;
    }
    throw ContractError("unknown model `" + s + "` (deepwalk, node2vec, ppr)");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

WalkRng::WalkRng(std::uint64_t seed, WalkId walk, std::uint64_t epoch, std::uint32_t position) noexcept
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ walk);
    h = splitmix64(h ^ epoch);
    state_ = splitmix64(h ^ position);
}

std::uint64_t WalkRng::next() noexcept
{
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t WalkRng::uniform_index(std::uint64_t n) noexcept
{
    // Lemire's multiply-shift with rejection.
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        std::uint64_t const threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double WalkRng::uniform01() noexcept
{
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

}  // namespace wharf
