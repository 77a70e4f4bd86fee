#include "loglab/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "loglab/random.hpp"
#include "loglab/stats.hpp"

namespace loglab::fractal {

namespace {

std::uint64_t sample_seed(std::uint64_t seed, std::size_t i) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i) + 0x632be59bd9b4e019ULL));
}

void check_dims(int d, int depth, int window) {
    if (d < 1) throw std::invalid_argument("fractal: d must be positive");
    if (depth < 0) throw std::invalid_argument("fractal: depth must be nonnegative");
    if (window < 1) throw std::invalid_argument("fractal: window must be positive");
    const double bits = d * (std::log2(static_cast<double>(window)) + depth);
    if (bits > 62) throw std::invalid_argument("fractal: window too large to index");
}

std::int64_t side(int window, int level) { return static_cast<std::int64_t>(window) << level; }

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), low_(n, 0), high_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    // Returns true once the merged component touches both faces.
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent_[b] = a;
            low_[a] |= low_[b];
            high_[a] |= high_[b];
        }
        return low_[a] && high_[a];
    }
    void mark(std::size_t x, bool low, bool high) {
        const std::size_t r = find(x);
        low_[r] |= static_cast<char>(low);
        high_[r] |= static_cast<char>(high);
    }
    bool spans(std::size_t x) {
        const std::size_t r = find(x);
        return low_[r] && high_[r];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<char> low_, high_;
};

std::vector<std::vector<int>> neighbor_offsets(int d, Connectivity mode) {
    std::vector<std::vector<int>> out;
    if (mode == Connectivity::half_open) {
        for (int i = 0; i < d; ++i)
            for (int s : {-1, 1}) {
                std::vector<int> o(static_cast<std::size_t>(d), 0);
                o[static_cast<std::size_t>(i)] = s;
                out.push_back(std::move(o));
            }
        return out;
    }
    std::vector<int> o(static_cast<std::size_t>(d), -1);
    while (true) {
        if (std::any_of(o.begin(), o.end(), [](int v) { return v != 0; })) out.push_back(o);
        int i = 0;
        while (i < d && o[static_cast<std::size_t>(i)] == 1) o[static_cast<std::size_t>(i++)] = -1;
        if (i == d) break;
        ++o[static_cast<std::size_t>(i)];
    }
    return out;
}

std::uint64_t linear_index(std::span<const std::int64_t> c, std::int64_t s) {
    std::uint64_t idx = 0;
    for (std::size_t i = c.size(); i-- > 0;) idx = idx * static_cast<std::uint64_t>(s) + static_cast<std::uint64_t>(c[i]);
    return idx;
}

void decode(std::uint64_t idx, std::int64_t s, std::span<std::int64_t> out) {
    for (auto& c : out) {
        c = static_cast<std::int64_t>(idx % static_cast<std::uint64_t>(s));
        idx /= static_cast<std::uint64_t>(s);
    }
}

}  // namespace

double box_uniform(std::uint64_t seed, int level, std::span<const std::int64_t> box) {
    return keyed_uniform(seed, DrawDomain::fractal, static_cast<std::uint32_t>(level),
                         hash_coords(box, 0x94d049bb133111ebULL * static_cast<std::uint64_t>(level + 1)));
}

RetainedTree sample_retained(int d, double p, int depth, int window, std::uint64_t seed, std::size_t max_boxes) {
    check_dims(d, depth, window);
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("sample_retained: p must lie in [0, 1]");
    double expected = std::pow(static_cast<double>(window), d) * p;
    double total_expected = expected;
    for (int j = 1; j <= depth; ++j) {
        expected *= std::ldexp(p, d);
        total_expected += expected;
    }
    if (total_expected > static_cast<double>(max_boxes))
        throw std::length_error("sample_retained: expected retained boxes exceed the memory guard");

    RetainedTree tree;
    tree.d = d;
    tree.depth = depth;
    tree.window = window;
    tree.p = p;
    tree.boxes.resize(static_cast<std::size_t>(depth) + 1);
    tree.parent.resize(static_cast<std::size_t>(depth) + 1);
    const auto ud = static_cast<std::size_t>(d);
    std::vector<std::int64_t> box(ud);
    std::size_t total = 0;

    const std::int64_t s0 = window;
    std::uint64_t cells0 = 1;
    for (int i = 0; i < d; ++i) cells0 *= static_cast<std::uint64_t>(s0);
    for (std::uint64_t idx = 0; idx < cells0; ++idx) {
        decode(idx, s0, box);
        if (box_uniform(seed, 0, box) < p) {
            tree.boxes[0].insert(tree.boxes[0].end(), box.begin(), box.end());
            tree.parent[0].push_back(0);
        }
    }
    total += tree.count(0);

    const std::uint32_t children = 1u << d;
    for (int j = 1; j <= depth; ++j) {
        auto& out = tree.boxes[static_cast<std::size_t>(j)];
        auto& par = tree.parent[static_cast<std::size_t>(j)];
        const std::size_t parents = tree.count(j - 1);
        for (std::size_t q = 0; q < parents; ++q) {
            const auto pb = tree.box(j - 1, q);
            for (std::uint32_t c = 0; c < children; ++c) {
                for (std::size_t i = 0; i < ud; ++i) box[i] = 2 * pb[i] + ((c >> i) & 1u);
                if (box_uniform(seed, j, box) < p) {
                    out.insert(out.end(), box.begin(), box.end());
                    par.push_back(static_cast<std::uint32_t>(q));
                    if (++total > max_boxes) throw std::length_error("sample_retained: memory guard exceeded");
                }
            }
        }
    }
    return tree;
}

double survival_probability(int d, double p) {
    if (d < 1) throw std::invalid_argument("survival_probability: d must be positive");
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("survival_probability: p must lie in [0, 1]");
    if (p == 1) return 1.0;
    if (std::ldexp(p, d) <= 1) return 0.0;
    const double children = std::ldexp(1.0, d);
    double q = 0;
    for (int it = 0; it < 10'000'000; ++it) {
        const double next = std::pow(1 - p + p * q, children);
        const bool done = std::abs(next - q) < 1e-12;
        q = next;
        if (done) break;
    }
    return 1 - q;
}

bool has_crossing(const RetainedTree& tree, int axis, Connectivity mode) {
    if (axis < 0 || axis >= tree.d) throw std::invalid_argument("has_crossing: axis out of range");
    const int n = tree.depth;
    const std::size_t count = tree.boxes.empty() ? 0 : tree.count(n);
    if (count == 0) return false;
    const std::int64_t s = side(tree.window, n);
    const auto ud = static_cast<std::size_t>(tree.d);
    const auto ua = static_cast<std::size_t>(axis);
    std::unordered_map<std::uint64_t, std::size_t> index;
    index.reserve(count * 2);
    for (std::size_t i = 0; i < count; ++i) index.emplace(linear_index(tree.box(n, i), s), i);

    UnionFind uf(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto b = tree.box(n, i);
        uf.mark(i, b[ua] == 0, b[ua] == s - 1);
    }
    const auto offsets = neighbor_offsets(tree.d, mode);
    std::vector<std::int64_t> nb(ud);
    for (std::size_t i = 0; i < count; ++i) {
        const auto b = tree.box(n, i);
        if (uf.spans(i)) return true;
        for (const auto& o : offsets) {
            bool inside = true;
            for (std::size_t k = 0; k < ud; ++k) {
                nb[k] = b[k] + o[k];
                if (nb[k] < 0 || nb[k] >= s) inside = false;
            }
            if (!inside) continue;
            const auto it = index.find(linear_index(nb, s));
            if (it != index.end() && uf.unite(i, it->second)) return true;
        }
    }
    return false;
}

double crossing_threshold(int d, int depth, int window, std::uint64_t seed, int axis, Connectivity mode) {
    check_dims(d, depth, window);
    if (axis < 0 || axis >= d) throw std::invalid_argument("crossing_threshold: axis out of range");
    const auto ud = static_cast<std::size_t>(d);
    const std::int64_t s_final = side(window, depth);
    if (std::pow(static_cast<double>(s_final), d) > static_cast<double>(std::size_t{1} << 26))
        throw std::length_error("crossing_threshold: dense grid exceeds the memory guard");

    std::vector<std::int64_t> box(ud), parent(ud);
    std::vector<double> tau;
    for (int j = 0; j <= depth; ++j) {
        const std::int64_t s = side(window, j);
        std::uint64_t cells = 1;
        for (int i = 0; i < d; ++i) cells *= static_cast<std::uint64_t>(s);
        std::vector<double> next(cells);
        for (std::uint64_t idx = 0; idx < cells; ++idx) {
            decode(idx, s, box);
            double t = box_uniform(seed, j, box);
            if (j > 0) {
                for (std::size_t i = 0; i < ud; ++i) parent[i] = box[i] >> 1;
                t = std::max(t, tau[linear_index(parent, s / 2)]);
            }
            next[idx] = t;
        }
        tau = std::move(next);
    }

    std::vector<std::size_t> order(tau.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tau[a] < tau[b]; });
    UnionFind uf(tau.size());
    std::vector<char> added(tau.size(), 0);
    const auto offsets = neighbor_offsets(d, mode);
    const auto ua = static_cast<std::size_t>(axis);
    std::vector<std::int64_t> nb(ud);
    for (std::size_t cell : order) {
        decode(cell, s_final, box);
        added[cell] = 1;
        uf.mark(cell, box[ua] == 0, box[ua] == s_final - 1);
        bool spans = uf.spans(cell);
        for (const auto& o : offsets) {
            if (spans) break;
            bool inside = true;
            for (std::size_t k = 0; k < ud; ++k) {
                nb[k] = box[k] + o[k];
                if (nb[k] < 0 || nb[k] >= s_final) inside = false;
            }
            if (!inside) continue;
            const auto other = linear_index(nb, s_final);
            if (added[other]) spans = uf.unite(cell, other);
        }
        if (spans) return tau[cell];
    }
    return 1.0;
}

RateEstimate crossing_probability(int d, double p, int depth, int window, std::size_t samples, std::uint64_t seed,
                                  Connectivity mode, int axis) {
    if (samples == 0) throw std::invalid_argument("crossing_probability: samples must be positive");
    RateEstimate est;
    est.samples = samples;
    for (std::size_t i = 0; i < samples; ++i) {
        const auto tree = sample_retained(d, p, depth, window, sample_seed(seed, i));
        if (has_crossing(tree, axis, mode)) ++est.successes;
    }
    const double n = static_cast<double>(samples);
    est.rate = static_cast<double>(est.successes) / n;
    est.std_error = std::sqrt(est.rate * (1 - est.rate) / n);
    std::tie(est.ci_lo, est.ci_hi) = wilson_interval(est.successes, samples);
    return est;
}

RateEstimate truncated_survival(int d, double p, int depth, std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw std::invalid_argument("truncated_survival: samples must be positive");
    if (depth < 0) throw std::invalid_argument("truncated_survival: depth must be nonnegative");
    // Once the extinction probability q^Z of the current generation is below 1e-15 survival is certain
    // to double precision.
    const double q = 1 - survival_probability(d, p);
    const double cap = q < 1 ? (q > 0 ? 34.6 / -std::log(q) : 1.0) : std::numeric_limits<double>::infinity();
    const auto children = static_cast<std::int64_t>(1) << d;
    Stream stream(seed, 0x66726163ULL);
    RateEstimate est;
    est.samples = samples;
    for (std::size_t i = 0; i < samples; ++i) {
        // Per-sample streams make the depth-n events nested across depth.
        Stream rng = stream.child(i);
        std::int64_t z = 1;
        for (int j = 0; j < depth && z > 0; ++j) {
            if (static_cast<double>(z) >= cap) break;
            std::binomial_distribution<std::int64_t> offspring(z * children, p);
            z = offspring(rng);
        }
        if (z > 0) ++est.successes;
    }
    const double n = static_cast<double>(samples);
    est.rate = static_cast<double>(est.successes) / n;
    est.std_error = std::sqrt(est.rate * (1 - est.rate) / n);
    std::tie(est.ci_lo, est.ci_hi) = wilson_interval(est.successes, samples);
    return est;
}

PcEstimate estimate_pc(int d, int depth, std::size_t samples, double tol, std::uint64_t seed, int window) {
    if (samples == 0) throw std::invalid_argument("estimate_pc: samples must be positive");
    if (!(tol > 0)) throw std::invalid_argument("estimate_pc: tol must be positive");
    if (d <= 4 && depth > 6) throw std::invalid_argument("estimate_pc: depth above 6 exceeds the cost guard");
    PcEstimate est;
    est.thresholds.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i)
        est.thresholds.push_back(crossing_threshold(d, depth, window, sample_seed(seed, i)));
    std::sort(est.thresholds.begin(), est.thresholds.end());
    const double n = static_cast<double>(samples);
    // Crossing at p happens iff the sample threshold is < p, so this rate is the coupled MC estimate
    // at p and is nondecreasing in p by construction.
    auto rate = [&](double p) {
        return static_cast<double>(std::lower_bound(est.thresholds.begin(), est.thresholds.end(), p) -
                                   est.thresholds.begin()) /
               n;
    };
    double lo = 0, hi = 1;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (rate(mid) >= 0.5 ? hi : lo) = mid;
    }
    est.pc_estimate = 0.5 * (lo + hi);
    const double half = 1.959963984540054 * std::sqrt(n) / 2;
    const auto rank = [&](double r) {
        return est.thresholds[static_cast<std::size_t>(std::clamp(r, 0.0, n - 1))];
    };
    est.ci_lo = rank(std::floor(n / 2 - half) - 1);
    est.ci_hi = rank(std::ceil(n / 2 + half));
    return est;
}

}  // namespace loglab::fractal
