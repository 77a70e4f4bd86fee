#include "loglab/paths.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "loglab/random.hpp"

namespace loglab {

const char* to_string(PathFamily family) {
    switch (family) {
        case PathFamily::P: return "P";
        case PathFamily::S: return "S";
        case PathFamily::zigzag: return "zigzag";
        case PathFamily::tube: return "tube";
    }
    return "?";
}

PathFamily path_family_from_string(const std::string& name) {
    if (name == "P") return PathFamily::P;
    if (name == "S") return PathFamily::S;
    if (name == "zigzag") return PathFamily::zigzag;
    if (name == "tube") return PathFamily::tube;
    throw std::invalid_argument("unknown path family '" + name + "'");
}

double Path::spacing() const { return 1.0 / (static_cast<double>(denominator) * std::ldexp(1.0, 3 * scale)); }

std::vector<double> Path::position(std::size_t i) const {
    const double h = spacing();
    std::vector<double> out(static_cast<std::size_t>(d));
    auto v = vertex(i);
    for (int k = 0; k < d; ++k) out[k] = static_cast<double>(v[k]) * h;
    return out;
}

PointSet Path::points() const {
    const double h = spacing();
    std::vector<double> flat(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) flat[i] = static_cast<double>(coords[i]) * h;
    return PointSet(d, std::move(flat));
}

std::string Path::tag() const {
    if (family == PathFamily::zigzag) return "zigzag";
    if (family == PathFamily::tube) return "tube";
    return std::string(to_string(family)) + (scale == 0 ? "_base" : "_refined");
}

namespace paths {

namespace {

constexpr std::int64_t kCoordinateLimit = std::int64_t{1} << 58;

// Offset from the tube origin with at most four nonzero coordinates, sorted by index.
struct Sparse {
    std::uint8_t count = 0;
    std::array<std::int32_t, 4> index{};
    std::array<std::int32_t, 4> value{};

    void add(std::int32_t i, std::int32_t v) {
        if (v == 0) return;
        for (int k = 0; k < count; ++k)
            if (index[k] == i) {
                value[k] += v;
                if (value[k] == 0) {
                    for (int m = k; m + 1 < count; ++m) {
                        index[m] = index[m + 1];
                        value[m] = value[m + 1];
                    }
                    --count;
                }
                return;
            }
        if (count == 4) throw std::logic_error("sparse offset overflow");
        int k = count++;
        while (k > 0 && index[k - 1] > i) {
            index[k] = index[k - 1];
            value[k] = value[k - 1];
            --k;
        }
        index[k] = i;
        value[k] = v;
    }

    bool operator==(const Sparse& o) const {
        if (count != o.count) return false;
        for (int k = 0; k < count; ++k)
            if (index[k] != o.index[k] || value[k] != o.value[k]) return false;
        return true;
    }
};

// Dense lexicographic comparison of two sparse vectors: -1, 0 or 1.
int compare_sparse(const Sparse& a, const Sparse& b) {
    int i = 0, j = 0;
    while (i < a.count || j < b.count) {
        const std::int32_t ia = i < a.count ? a.index[i] : std::numeric_limits<std::int32_t>::max();
        const std::int32_t ib = j < b.count ? b.index[j] : std::numeric_limits<std::int32_t>::max();
        std::int32_t va = 0, vb = 0;
        if (ia <= ib) va = a.value[i++];
        if (ib <= ia) vb = b.value[j++];
        if (va != vb) return va < vb ? -1 : 1;
    }
    return 0;
}

using SubPath = std::array<Sparse, 11>;

bool sub_path_less(const SubPath& a, const SubPath& b) {
    for (int k = 0; k < 11; ++k) {
        const int c = compare_sparse(a[k], b[k]);
        if (c != 0) return c < 0;
    }
    return false;
}

// Maps canonical (1-based) coordinates to actual (0-based) ones: canonical 1 and 2 are
// pinned, the remaining canonical indices fill the unused coordinates in increasing order.
struct CoordinateMap {
    int d;
    int first;
    int second;  // -1 if only one pinned coordinate

    int operator()(int canonical) const {
        if (canonical == 1) return first;
        if (second >= 0 && canonical == 2) return second;
        const int pinned = second >= 0 ? 2 : 1;
        int actual = canonical - pinned - 1;
        int lo = first, hi = second;
        if (hi >= 0 && hi < lo) std::swap(lo, hi);
        if (actual >= lo) ++actual;
        if (hi >= 0 && actual >= hi) ++actual;
        if (actual >= d) throw std::invalid_argument("tube construction needs more coordinates than the dimension");
        return actual;
    }
};

struct Builder {
    const CoordinateMap& map;
    Sparse make(std::initializer_list<std::pair<int, int>> terms) const {
        Sparse s;
        for (auto [c, v] : terms) s.add(map(c), v);
        return s;
    }
};

std::vector<SubPath> free_start_tube(int d, int axis, int sign, int count) {
    if (2 * count + 1 > d) throw std::invalid_argument("tube_paths: free start needs 2q + 1 <= d");
    CoordinateMap map{d, axis, -1};
    Builder b{map};
    std::vector<SubPath> out;
    for (int t = 1; t <= count; ++t) {
        SubPath p;
        for (int k = 0; k <= 8; ++k) p[k] = b.make({{1, sign * k}, {2 * t, 1}});
        p[9] = b.make({{1, sign * 8}, {2 * t, 1}, {2 * t + 1, 1}});
        p[10] = b.make({{1, sign * 8}, {2 * t + 1, 1}});
        out.push_back(p);
    }
    return out;
}

// z = x + zsign e_zaxis; y = x + 8 sign e_axis.
std::vector<SubPath> fixed_start_tube(int d, int axis, int sign, int zaxis, int zsign, int count) {
    std::vector<SubPath> out;
    if (zaxis == axis) {
        CoordinateMap map{d, axis, -1};
        Builder b{map};
        const int s = sign * zsign;  // +1: y lies on the side of z
        if (s == 1) {
            if (2 * count + 1 > d) throw std::invalid_argument("tube_paths: fixed start needs 2q + 1 <= d");
            for (int t = 1; t <= count; ++t) {
                SubPath p;
                p[0] = b.make({{1, zsign}});
                for (int k = 1; k <= 8; ++k) p[k] = b.make({{1, zsign * k}, {2 * t, 1}});
                p[9] = b.make({{1, zsign * 8}, {2 * t, 1}, {2 * t + 1, 1}});
                p[10] = b.make({{1, zsign * 8}, {2 * t + 1, 1}});
                out.push_back(p);
            }
        } else {
            if (count + 1 > d) throw std::invalid_argument("tube_paths: fixed start needs q + 1 <= d");
            for (int t = 2; t <= count + 1; ++t) {
                SubPath p;
                p[0] = b.make({{1, zsign}});
                p[1] = b.make({{1, zsign}, {t, 1}});
                for (int k = 0; k <= 8; ++k) p[2 + k] = b.make({{1, -zsign * k}, {t, 1}});
                out.push_back(p);
            }
        }
        return out;
    }
    if (count + 2 > d) throw std::invalid_argument("tube_paths: fixed start needs q + 2 <= d");
    CoordinateMap map{d, zaxis, axis};
    Builder b{map};
    for (int t = 3; t <= count + 2; ++t) {
        SubPath p;
        p[0] = b.make({{1, zsign}});
        p[1] = b.make({{1, zsign}, {t, 1}});
        if (zsign == 1) {
            for (int k = 1; k <= 8; ++k) p[1 + k] = b.make({{1, 1}, {2, sign * k}, {t, 1}});
            p[10] = b.make({{2, sign * 8}, {t, 1}});
        } else {
            for (int k = 0; k <= 8; ++k) p[2 + k] = b.make({{2, sign * k}, {t, 1}});
        }
        out.push_back(p);
    }
    return out;
}

void edge_direction(std::span<const std::int64_t> a, std::span<const std::int64_t> b, int& axis, int& sign) {
    axis = -1;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const std::int64_t diff = b[k] - a[k];
        if (diff == 0) continue;
        if (axis >= 0 || (diff != 1 && diff != -1))
            throw std::invalid_argument("refine_path: consecutive vertices are not lattice neighbors");
        axis = static_cast<int>(k);
        sign = static_cast<int>(diff);
    }
    if (axis < 0) throw std::invalid_argument("refine_path: repeated vertex");
}

Path to_path(const SubPath& sub, std::span<const std::int64_t> x, int d) {
    Path p;
    p.family = PathFamily::tube;
    p.d = d;
    for (const Sparse& s : sub) {
        std::vector<std::int64_t> v(x.begin(), x.end());
        for (int k = 0; k < s.count; ++k) v[s.index[k]] += s.value[k];
        p.push_back(v);
    }
    return p;
}

class VertexIndex {
public:
    explicit VertexIndex(const Path& p) : path_(p) {
        map_.reserve(p.size() * 2);
        for (std::size_t i = 0; i < p.size(); ++i) map_.emplace(hash_coords(p.vertex(i)), static_cast<std::uint32_t>(i));
    }

    bool contains(std::span<const std::int64_t> v) const { return find(v, hash_coords(v)); }

    std::size_t duplicates() const {
        std::size_t count = 0;
        for (auto it = map_.begin(); it != map_.end();) {
            auto range = map_.equal_range(it->first);
            std::vector<std::uint32_t> ids;
            for (auto r = range.first; r != range.second; ++r) ids.push_back(r->second);
            for (std::size_t a = 0; a < ids.size(); ++a)
                for (std::size_t b = a + 1; b < ids.size(); ++b)
                    if (std::equal(path_.vertex(ids[a]).begin(), path_.vertex(ids[a]).end(),
                                   path_.vertex(ids[b]).begin()))
                        ++count;
            it = range.second;
        }
        return count;
    }

private:
    bool find(std::span<const std::int64_t> v, std::uint64_t h) const {
        auto range = map_.equal_range(h);
        for (auto r = range.first; r != range.second; ++r) {
            auto w = path_.vertex(r->second);
            if (std::equal(v.begin(), v.end(), w.begin())) return true;
        }
        return false;
    }

    const Path& path_;
    std::unordered_multimap<std::uint64_t, std::uint32_t> map_;
};

std::int64_t abs_sum(std::span<const std::int64_t> v) {
    std::int64_t s = 0;
    for (std::int64_t c : v) s += c < 0 ? -c : c;
    return s;
}

std::int64_t pow8(int k) { return std::int64_t{1} << (3 * k); }

// l1 distance from v to the axis-parallel segment [a, b].
std::int64_t l1_to_segment(std::span<const std::int64_t> v, std::span<const std::int64_t> a,
                           std::span<const std::int64_t> b, std::int64_t scale) {
    std::int64_t dist = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const std::int64_t lo = std::min(a[k], b[k]) * scale;
        const std::int64_t hi = std::max(a[k], b[k]) * scale;
        if (v[k] < lo) dist += lo - v[k];
        else if (v[k] > hi) dist += v[k] - hi;
    }
    return dist;
}

}  // namespace

int tube_count(int d) { return d / 10; }

int lattice_denominator(int d) {
    int r = static_cast<int>(std::sqrt(static_cast<double>(d)));
    while (static_cast<long>(r + 1) * (r + 1) <= d) ++r;
    while (static_cast<long>(r) * r > d) --r;
    return r;
}

std::int64_t refined_length(std::int64_t L0, int n) {
    std::int64_t L = L0;
    for (int i = 0; i < n; ++i) L = 10 * (L - 1) + 1;
    return L;
}

Path base_path(int d, int M, std::span<const int> seq) {
    if (d < 1) throw std::invalid_argument("base_path: d must be positive");
    if (M < 1 || static_cast<int>(seq.size()) != M) throw std::invalid_argument("base_path: sequence must have length M");
    Path p;
    p.family = PathFamily::P;
    p.d = d;
    p.M = M;
    std::vector<std::int64_t> v(static_cast<std::size_t>(d), 0);
    for (int i : seq) {
        if (i < 1 || i > d) throw std::out_of_range("base_path: index out of range [1, d]");
        ++v[i - 1];
        p.push_back(v);
    }
    return p;
}

Path zigzag_base_path(int d, int M, std::span<const int> seq) {
    if (d < 2) throw std::invalid_argument("zigzag_base_path: d must be at least 2");
    if (M < 1 || static_cast<int>(seq.size()) != M)
        throw std::invalid_argument("zigzag_base_path: sequence must have length M");
    for (int i : seq)
        if (i < 2 || i > d) throw std::out_of_range("zigzag_base_path: index out of range [2, d]");
    Path p;
    p.family = PathFamily::zigzag;
    p.d = d;
    p.M = M;
    std::vector<std::int64_t> v(static_cast<std::size_t>(d), 0);
    ++v[seq[0] - 1];
    p.push_back(v);
    auto step = [&](int coord, int delta) {
        v[coord - 1] += delta;
        p.push_back(v);
    };
    for (int k = 1; k < M; ++k) {
        step(1, 1);
        step(seq[k], 1);
    }
    step(1, 1);
    for (int k = M - 1; k >= 1; --k) {
        step(1, 1);
        step(seq[k], -1);
    }
    step(1, 1);
    return p;
}

Path interpolate_base(const Path& path, int r) {
    if (r < 1) throw std::invalid_argument("interpolate_base: r must be positive");
    if (path.scale != 0 || path.denominator != 1) throw std::invalid_argument("interpolate_base: path must be on the unit lattice");
    Path out;
    out.family = path.family == PathFamily::P ? PathFamily::S : path.family;
    out.d = path.d;
    out.M = path.M;
    out.denominator = r;
    if (path.size() == 0) return out;
    std::vector<std::int64_t> v(path.vertex(0).begin(), path.vertex(0).end());
    for (auto& c : v) c *= r;
    out.push_back(v);
    for (std::size_t i = 1; i < path.size(); ++i) {
        int axis = 0, sign = 1;
        edge_direction(path.vertex(i - 1), path.vertex(i), axis, sign);
        for (int s = 0; s < r; ++s) {
            v[axis] += sign;
            out.push_back(v);
        }
    }
    return out;
}

bool is_nearest_neighbor(const Path& path) {
    for (std::size_t i = 1; i < path.size(); ++i) {
        auto a = path.vertex(i - 1);
        auto b = path.vertex(i);
        std::int64_t diff = 0;
        for (int k = 0; k < path.d; ++k) diff += std::abs(a[k] - b[k]);
        if (diff != 1) return false;
    }
    return true;
}

bool is_self_avoiding(const Path& path) { return VertexIndex(path).duplicates() == 0; }

bool Tube::contains(std::span<const std::int64_t> z) const {
    std::int64_t dist = 0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        std::int64_t lo = x[k], hi = x[k];
        if (static_cast<int>(k) == axis) (sign > 0 ? hi : lo) += 8 * sign;
        if (z[k] < lo) dist += lo - z[k];
        else if (z[k] > hi) dist += z[k] - hi;
    }
    return dist <= 2;
}

std::vector<Path> tube_paths(std::span<const std::int64_t> x, int axis, int sign,
                             std::optional<std::vector<std::int64_t>> z, int count) {
    const int d = static_cast<int>(x.size());
    if (axis < 0 || axis >= d || (sign != 1 && sign != -1)) throw std::invalid_argument("tube_paths: bad edge direction");
    for (std::int64_t c : x)
        if (c % 8 != 0) throw std::invalid_argument("tube_paths: x must lie in 8Z^d");
    std::vector<SubPath> subs;
    if (!z) {
        subs = free_start_tube(d, axis, sign, count);
    } else {
        int zaxis = 0, zsign = 1;
        if (static_cast<int>(z->size()) != d) throw std::invalid_argument("tube_paths: z dimension mismatch");
        edge_direction(x, *z, zaxis, zsign);
        subs = fixed_start_tube(d, axis, sign, zaxis, zsign, count);
    }
    std::vector<Path> out;
    for (const SubPath& s : subs) out.push_back(to_path(s, x, d));
    return out;
}

int RefinementOptions::resolved_tube_paths(int d) const { return tube_paths > 0 ? tube_paths : tube_count(d); }

int RefinementOptions::resolved_branching(int d) const {
    const int b = branching > 0 ? branching : resolved_tube_paths(d) - 10;
    if (b < 1)
        throw std::invalid_argument("refinement needs floor(d/10) >= 11 (d >= 110) or an explicit branching override");
    if (b > resolved_tube_paths(d)) throw std::invalid_argument("branching exceeds the number of tube paths");
    return b;
}

bool RefinementOptions::canonical(int d) const {
    return resolved_tube_paths(d) == tube_count(d) && resolved_branching(d) == tube_count(d) - 10;
}

namespace {

// Core refinement; `choose(edge, branching, vertex_hash_a, vertex_hash_b)` returns the subset index.
template <class Choose>
Path refine_impl(const Path& path, const RefinementOptions& options, Choose&& choose) {
    const int d = path.d;
    const std::size_t L = path.size();
    if (L < 2) throw std::invalid_argument("refine_path: path needs at least two vertices");
    const int count = options.resolved_tube_paths(d);
    const int branching = options.resolved_branching(d);
    for (std::int64_t c : path.coords)
        if (c > kCoordinateLimit || c < -kCoordinateLimit)
            throw std::overflow_error("refine_path: coordinates would overflow at the next scale");

    Path out;
    out.family = path.family;
    out.d = d;
    out.M = path.M;
    out.scale = path.scale + 1;
    out.denominator = path.denominator;
    out.coords.reserve((10 * (L - 1) + 1) * static_cast<std::size_t>(d));

    SubPath previous{};
    int prev_axis = 0, prev_sign = 1;
    std::vector<std::int64_t> v(static_cast<std::size_t>(d));
    for (std::size_t k = 0; k + 1 < L; ++k) {
        int axis = 0, sign = 1;
        edge_direction(path.vertex(k), path.vertex(k + 1), axis, sign);
        std::vector<SubPath> candidates;
        SubPath prev_local{};
        if (k == 0) {
            candidates = free_start_tube(d, axis, sign, count);
        } else {
            // Express the previous sub-path relative to the new origin 8 x_k = 8 x_{k-1} + 8 e.
            for (int m = 0; m < 11; ++m) {
                prev_local[m] = previous[m];
                prev_local[m].add(prev_axis, -8 * prev_sign);
            }
            const Sparse& z = prev_local[10];
            if (z.count != 1 || (z.value[0] != 1 && z.value[0] != -1))
                throw std::logic_error("refine_path: previous sub-path does not end next to the shared vertex");
            candidates = fixed_start_tube(d, axis, sign, z.index[0], z.value[0], count);
        }
        std::sort(candidates.begin(), candidates.end(), sub_path_less);

        std::vector<const SubPath*> admissible;
        for (const SubPath& c : candidates) {
            bool ok = true;
            if (k > 0)
                for (int m = 1; m < 11 && ok; ++m)
                    for (int p = 0; p < 11; ++p)
                        if (c[m] == prev_local[p]) {
                            ok = false;
                            break;
                        }
            if (ok) admissible.push_back(&c);
            if (static_cast<int>(admissible.size()) == branching) break;
        }
        if (static_cast<int>(admissible.size()) < branching)
            throw std::runtime_error("refine_path: fewer admissible tube paths than the branching number");

        const int index = choose(k, branching);
        if (index < 0 || index >= branching) throw std::out_of_range("refine_path: choice index out of range");
        const SubPath& chosen = *admissible[static_cast<std::size_t>(index)];

        auto base = path.vertex(k);
        for (int m = (k == 0 ? 0 : 1); m < 11; ++m) {
            for (int c = 0; c < d; ++c) v[c] = 8 * base[c];
            for (int s = 0; s < chosen[m].count; ++s) v[chosen[m].index[s]] += chosen[m].value[s];
            out.push_back(v);
        }
        previous = chosen;
        prev_axis = axis;
        prev_sign = sign;
    }
    return out;
}

}  // namespace

Path refine_path(const Path& path, std::span<const int> choices, const RefinementOptions& options) {
    if (choices.size() + 1 != path.size()) throw std::invalid_argument("refine_path: need one choice per edge");
    return refine_impl(path, options, [&](std::size_t edge, int) { return choices[edge]; });
}

Path refine_path_keyed(const Path& path, std::uint64_t seed, const RefinementOptions& options) {
    const int d = path.d;
    // Linear position hash, updated in O(1) along the path.
    std::vector<std::uint64_t> weights(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) weights[k] = splitmix64(0x9e3779b97f4a7c15ULL * (k + 1)) | 1;
    auto vertex_hash = [&](std::span<const std::int64_t> v) {
        std::uint64_t h = 0;
        for (int k = 0; k < d; ++k) h += weights[k] * static_cast<std::uint64_t>(v[k]);
        return h;
    };
    std::vector<std::uint64_t> hashes(path.size());
    if (!hashes.empty()) hashes[0] = vertex_hash(path.vertex(0));
    for (std::size_t i = 1; i < path.size(); ++i) {
        int axis = 0, sign = 1;
        edge_direction(path.vertex(i - 1), path.vertex(i), axis, sign);
        hashes[i] = hashes[i - 1] + weights[axis] * static_cast<std::uint64_t>(static_cast<std::int64_t>(sign));
    }
    const auto level = static_cast<std::uint32_t>(path.scale);
    return refine_impl(path, options, [&](std::size_t edge, int branching) {
        const std::uint64_t key = splitmix64(hashes[edge] ^ splitmix64(hashes[edge + 1] + 0x632be59bd9b4e019ULL));
        const std::uint64_t bits = keyed_bits(seed, DrawDomain::refinement, level, key);
        return static_cast<int>((static_cast<unsigned __int128>(bits) * static_cast<unsigned>(branching)) >> 64);
    });
}

std::vector<int> base_sequence(int d, int M, PathFamily family, std::uint64_t seed) {
    const int lo = family == PathFamily::zigzag ? 2 : 1;
    const auto choices = static_cast<std::uint64_t>(d - lo + 1);
    std::vector<int> seq(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        const std::uint64_t bits = keyed_bits(seed, DrawDomain::base_sequence, 0, static_cast<std::uint64_t>(i));
        seq[i] = lo + static_cast<int>((static_cast<unsigned __int128>(bits) * choices) >> 64);
    }
    return seq;
}

Chain sample_refined_chain(int d, int M, int n, PathFamily family, std::uint64_t seed,
                           const RefinementOptions& options) {
    if (n < 0) throw std::invalid_argument("sample_refined_chain: n must be nonnegative");
    if (family == PathFamily::tube) throw std::invalid_argument("sample_refined_chain: tube is not a chain family");
    Chain chain;
    chain.sequence = base_sequence(d, M, family, seed);
    Path base = family == PathFamily::zigzag ? zigzag_base_path(d, M, chain.sequence) : base_path(d, M, chain.sequence);
    if (family != PathFamily::P) base = interpolate_base(base, lattice_denominator(d));
    chain.levels.reserve(static_cast<std::size_t>(n) + 1);
    chain.levels.push_back(std::move(base));
    if (n > 0) {
        chain.canonical = options.canonical(d);
        chain.branching = options.resolved_branching(d);
    }
    const std::uint64_t refine_seed = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
    for (int j = 0; j < n; ++j) chain.levels.push_back(refine_path_keyed(chain.levels.back(), refine_seed, options));
    return chain;
}

std::size_t intersection_count(const Path& a, const Path& b) {
    if (a.d != b.d || a.scale != b.scale || a.denominator != b.denominator)
        throw std::invalid_argument("intersection_count: paths live on different lattices");
    const Path& small = a.size() <= b.size() ? a : b;
    const Path& large = a.size() <= b.size() ? b : a;
    VertexIndex index(small);
    std::size_t count = 0;
    for (std::size_t i = 0; i < large.size(); ++i)
        if (index.contains(large.vertex(i))) ++count;
    return count;
}

void box_of_vertex(std::span<const std::int64_t> v, int scale, std::int64_t denominator, int m,
                   std::span<std::int64_t> out) {
    if (m < 0 || m > 62) throw std::invalid_argument("box_of_vertex: level out of range");
    if (denominator == 1 && m <= 3 * scale) {
        const int shift = 3 * scale - m;
        for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] >> shift;
        return;
    }
    const __int128 den = static_cast<__int128>(denominator) << (3 * scale);
    for (std::size_t k = 0; k < v.size(); ++k) {
        const __int128 num = static_cast<__int128>(v[k]) << m;
        __int128 q = num / den;
        if ((num % den != 0) && (num < 0)) --q;
        out[k] = static_cast<std::int64_t>(q);
    }
}

BoxSet boxes_touching(const Path& path, int m) {
    const std::size_t d = static_cast<std::size_t>(path.d);
    std::vector<std::int64_t> raw(path.coords.size());
    for (std::size_t i = 0; i < path.size(); ++i)
        box_of_vertex(path.vertex(i), path.scale, path.denominator, m, std::span(raw).subspan(i * d, d));
    std::vector<std::uint32_t> order(path.size());
    std::iota(order.begin(), order.end(), 0u);
    auto row = [&](std::uint32_t i) { return raw.begin() + static_cast<std::ptrdiff_t>(i * d); };
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::lexicographical_compare(row(a), row(a) + static_cast<std::ptrdiff_t>(d), row(b),
                                            row(b) + static_cast<std::ptrdiff_t>(d));
    });
    BoxSet out;
    out.d = path.d;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0 && std::equal(row(order[k]), row(order[k]) + static_cast<std::ptrdiff_t>(d), row(order[k - 1])))
            continue;
        out.rows.insert(out.rows.end(), row(order[k]), row(order[k]) + static_cast<std::ptrdiff_t>(d));
    }
    return out;
}

std::size_t box_intersection_count(const BoxSet& a, const BoxSet& b) {
    if (a.d != b.d) throw std::invalid_argument("box_intersection_count: dimension mismatch");
    std::size_t i = 0, j = 0, count = 0;
    while (i < a.size() && j < b.size()) {
        auto ra = a[i];
        auto rb = b[j];
        if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) ++i;
        else if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) ++j;
        else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

double hausdorff(const PointSet& a, const PointSet& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    auto directed = [](const PointSet& from, const PointSet& to) {
        double worst = 0;
        for (std::size_t i = 0; i < from.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < to.size() && best > worst; ++j)
                best = std::min(best, squared_distance(from[i], to[j]));
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(directed(a, b), directed(b, a));
}

double local_hausdorff(const PointSet& a, const PointSet& b, int levels) {
    if (a.dim() != b.dim()) throw std::invalid_argument("local_hausdorff: dimension mismatch");
    auto restrict_to = [](const PointSet& s, double radius) {
        PointSet out(s.dim());
        const double r2 = radius * radius;
        for (std::size_t i = 0; i < s.size(); ++i) {
            double n2 = 0;
            for (double c : s[i]) n2 += c * c;
            if (n2 < r2) out.push_back(s[i]);
        }
        return out;
    };
    double total = 0;
    for (int n = 1; n <= levels; ++n) {
        const double radius = std::ldexp(1.0, n);
        total += std::ldexp(1.0, -n) * std::min(1.0, hausdorff(restrict_to(a, radius), restrict_to(b, radius)));
    }
    return total;
}

ChainAudit audit_chain(const Chain& chain) {
    ChainAudit audit;
    if (chain.levels.empty()) return audit;
    const Path& base = chain.levels.front();
    const int n = static_cast<int>(chain.levels.size()) - 1;
    const std::int64_t rho = base.denominator;
    const int d = base.d;
    for (int j = 0; j <= n; ++j) {
        const Path& p = chain.levels[j];
        if (!is_self_avoiding(p)) ++audit.self_avoidance;
        if (!is_nearest_neighbor(p)) ++audit.nearest_neighbor;
        if (static_cast<std::int64_t>(p.size()) != refined_length(static_cast<std::int64_t>(base.size()), j))
            ++audit.length_law;

        const std::int64_t unit = pow8(j);
        const std::int64_t first = abs_sum(p.vertex(0));
        if (7 * rho * first > (7 * rho + 2) * unit) ++audit.endpoint_sphere;
        auto last = p.vertex(p.size() - 1);
        if (base.family == PathFamily::zigzag) {
            std::vector<std::int64_t> shifted(last.begin(), last.end());
            shifted[0] -= 2 * static_cast<std::int64_t>(base.M) * rho * unit;
            if (7 * rho * abs_sum(shifted) > (7 * rho + 2) * unit) ++audit.endpoint_sphere;
        } else if (7 * rho * abs_sum(last) < (7 * rho * base.M - 2) * unit) {
            ++audit.endpoint_sphere;
        }
    }
    if (n == 0) return audit;
    const Path& fine = chain.levels.back();
    std::vector<std::int64_t> box(static_cast<std::size_t>(d));
    for (int j = 0; j < n; ++j) {
        const Path& coarse = chain.levels[j];
        const std::int64_t factor = pow8(n - j);
        const std::int64_t stride = [&] {
            std::int64_t s = 1;
            for (int i = 0; i < n - j; ++i) s *= 10;
            return s;
        }();
        VertexIndex coarse_index(coarse);
        Path hit;
        hit.d = d;
        for (std::size_t i = 0; i < fine.size(); ++i) {
            const std::size_t edge = std::min<std::size_t>(static_cast<std::size_t>(i / stride), coarse.size() - 2);
            const std::int64_t dist = l1_to_segment(fine.vertex(i), coarse.vertex(edge), coarse.vertex(edge + 1), factor);
            if (7 * dist > 2 * factor) ++audit.containment;
            auto v = fine.vertex(i);
            for (int k = 0; k < d; ++k) box[k] = v[k] >> (3 * (n - j));
            if (!coarse_index.contains(box)) ++audit.box_containment;
            hit.push_back(box);
        }
        VertexIndex hit_index(hit);
        for (std::size_t i = 0; i < coarse.size(); ++i)
            if (!hit_index.contains(coarse.vertex(i))) ++audit.box_containment;
    }
    return audit;
}

}  // namespace paths
}  // namespace loglab
