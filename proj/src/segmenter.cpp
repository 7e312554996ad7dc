#include "scene/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>

#include "scene/error.hpp"

namespace scene {

namespace {

struct WeightedColor {
    Lab lab;
    double weight = 0.0;
};

std::size_t nearest(const Lab& c, const std::vector<Lab>& palette) noexcept {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < palette.size(); ++k) {
        const double dl = c.l - palette[k].l, da = c.a - palette[k].a, db = c.b - palette[k].b;
        const double d = dl * dl + da * da + db * db;
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

int grid_cell(double v, double lo, double hi, int levels) noexcept {
    const int cell = static_cast<int>(std::floor((v - lo) / (hi - lo) * levels));
    return std::clamp(cell, 0, levels - 1);
}

std::size_t idx(int x, int y, int w) noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
}

constexpr std::array<std::pair<int, int>, 4> kNeighbours = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

}  // namespace

PaletteMerge merge_palette(const std::vector<Lab>& colors, const std::vector<double>& weights, double tm) {
    if (colors.size() != weights.size()) throw ContractError("merge_palette: colours and weights differ in length");
    if (!(tm > 0.0)) throw ContractError("merge_palette: tm must be > 0");
    PaletteMerge out;
    if (colors.empty()) return out;

    double dmax = 0.0;
    for (std::size_t i = 0; i < colors.size(); ++i)
        for (std::size_t j = i + 1; j < colors.size(); ++j) dmax = std::max(dmax, lab_distance(colors[i], colors[j]));

    struct Cluster {
        Lab centroid;
        double weight;
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < colors.size(); ++i) clusters.push_back({colors[i], weights[i], {i}});

    while (clusters.size() > 1 && dmax > 0.0) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double d = lab_distance(clusters[i].centroid, clusters[j].centroid);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (best / dmax > tm) break;
        Cluster& a = clusters[bi];
        Cluster& b = clusters[bj];
        const double w = a.weight + b.weight;
        const double fa = w > 0.0 ? a.weight / w : 0.5;
        const double fb = 1.0 - fa;
        a.centroid = {fa * a.centroid.l + fb * b.centroid.l, fa * a.centroid.a + fb * b.centroid.a,
                      fa * a.centroid.b + fb * b.centroid.b};
        a.weight = w;
        a.members.insert(a.members.end(), b.members.begin(), b.members.end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    if (dmax == 0.0 && clusters.size() > 1) {
        // All colours identical: one class.
        Cluster merged{clusters[0].centroid, 0.0, {}};
        for (auto& c : clusters) {
            merged.weight += c.weight;
            merged.members.insert(merged.members.end(), c.members.begin(), c.members.end());
        }
        clusters = {merged};
    }

    out.assignment.resize(colors.size());
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        out.palette.push_back(clusters[k].centroid);
        for (auto m : clusters[k].members) out.assignment[m] = static_cast<std::uint32_t>(k);
    }
    return out;
}

ColorClassMap quantize_colors(const RasterImage& image, double tm, const QuantizerOptions& opt) {
    if (image.empty()) throw ContractError("quantize_colors: empty image");
    if (!(tm > 0.0)) throw ContractError("quantize_colors: tm must be > 0");
    if (opt.levels_per_axis < 1) throw ContractError("quantize_colors: levels_per_axis must be >= 1");

    // Distinct colours with pixel counts; everything below works on these.
    std::map<std::uint32_t, std::size_t> counts;
    std::vector<std::uint32_t> packed(image.pixel_count());
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const Rgb c = image.at(x, y);
            const std::uint32_t p = (static_cast<std::uint32_t>(c.r) << 16) | (static_cast<std::uint32_t>(c.g) << 8) | c.b;
            packed[idx(x, y, image.width())] = p;
            ++counts[p];
        }
    }
    std::vector<WeightedColor> distinct;
    std::map<std::uint32_t, std::size_t> distinct_index;
    for (const auto& [p, n] : counts) {
        distinct_index[p] = distinct.size();
        distinct.push_back({to_lab({static_cast<std::uint8_t>(p >> 16), static_cast<std::uint8_t>((p >> 8) & 0xff),
                                    static_cast<std::uint8_t>(p & 0xff)}),
                            static_cast<double>(n)});
    }

    // Initial palette: weighted means of occupied cells of a uniform Lab grid.
    const int L = opt.levels_per_axis;
    std::map<int, std::pair<Lab, double>> cells;
    for (const auto& d : distinct) {
        const int key = (grid_cell(d.lab.l, 0.0, 100.0, L) * L + grid_cell(d.lab.a, -128.0, 128.0, L)) * L +
                        grid_cell(d.lab.b, -128.0, 128.0, L);
        auto& [sum, w] = cells[key];
        sum.l += d.weight * d.lab.l;
        sum.a += d.weight * d.lab.a;
        sum.b += d.weight * d.lab.b;
        w += d.weight;
    }
    std::vector<Lab> centers;
    for (const auto& [key, acc] : cells)
        centers.push_back({acc.first.l / acc.second, acc.first.a / acc.second, acc.first.b / acc.second});

    std::vector<std::size_t> assign(distinct.size());
    for (int it = 0; it < opt.lloyd_iterations; ++it) {
        for (std::size_t i = 0; i < distinct.size(); ++i) assign[i] = nearest(distinct[i].lab, centers);
        std::vector<Lab> sums(centers.size());
        std::vector<double> w(centers.size(), 0.0);
        for (std::size_t i = 0; i < distinct.size(); ++i) {
            auto& s = sums[assign[i]];
            s.l += distinct[i].weight * distinct[i].lab.l;
            s.a += distinct[i].weight * distinct[i].lab.a;
            s.b += distinct[i].weight * distinct[i].lab.b;
            w[assign[i]] += distinct[i].weight;
        }
        std::vector<Lab> next;
        for (std::size_t k = 0; k < centers.size(); ++k)
            if (w[k] > 0.0) next.push_back({sums[k].l / w[k], sums[k].a / w[k], sums[k].b / w[k]});
        centers = std::move(next);
    }
    std::vector<double> center_weight(centers.size(), 0.0);
    for (std::size_t i = 0; i < distinct.size(); ++i) center_weight[nearest(distinct[i].lab, centers)] += distinct[i].weight;

    const PaletteMerge merged = merge_palette(centers, center_weight, tm);

    // Final assignment: nearest merged representative, classes compacted in palette order.
    std::vector<std::size_t> distinct_class(distinct.size());
    std::vector<char> used(merged.palette.size(), 0);
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        distinct_class[i] = nearest(distinct[i].lab, merged.palette);
        used[distinct_class[i]] = 1;
    }
    std::vector<std::uint32_t> remap(merged.palette.size(), 0);
    ColorClassMap out;
    out.width = image.width();
    out.height = image.height();
    for (std::size_t k = 0; k < merged.palette.size(); ++k) {
        if (!used[k]) continue;
        remap[k] = static_cast<std::uint32_t>(out.palette.size());
        out.palette.push_back(merged.palette[k]);
    }
    out.classes.resize(packed.size());
    for (std::size_t p = 0; p < packed.size(); ++p)
        out.classes[p] = remap[distinct_class[distinct_index.at(packed[p])]];
    return out;
}

namespace {

struct ClassAccumulator {
    std::vector<double> n, sx, sy, sq;
    std::vector<std::uint32_t> touched;

    explicit ClassAccumulator(std::size_t classes) : n(classes, 0.0), sx(classes, 0.0), sy(classes, 0.0), sq(classes, 0.0) {}

    void add(std::uint32_t c, double x, double y) {
        if (n[c] == 0.0) touched.push_back(c);
        n[c] += 1.0;
        sx[c] += x;
        sy[c] += y;
        sq[c] += x * x + y * y;
    }

    double j_value() {
        double N = 0.0, SX = 0.0, SY = 0.0, SQ = 0.0, SW = 0.0;
        for (auto c : touched) {
            N += n[c];
            SX += sx[c];
            SY += sy[c];
            SQ += sq[c];
            SW += sq[c] - (sx[c] * sx[c] + sy[c] * sy[c]) / n[c];
        }
        const double ST = SQ - (SX * SX + SY * SY) / N;
        const bool single = touched.size() <= 1;
        for (auto c : touched) n[c] = sx[c] = sy[c] = sq[c] = 0.0;
        touched.clear();
        if (single) return 0.0;
        if (SW <= 1e-12) return kMaxJ;
        return std::clamp((ST - SW) / SW, 0.0, kMaxJ);
    }
};

struct WindowBounds {
    int x0, x1, y0, y1;
};

WindowBounds clip_window(int cx, int cy, int side, int w, int h) noexcept {
    const int before = side / 2;
    const int after = side - 1 - before;
    return {std::max(cx - before, 0), std::min(cx + after, w - 1), std::max(cy - before, 0), std::min(cy + after, h - 1)};
}

}  // namespace

double compute_j(const ColorClassMap& map, const Window& window) {
    if (window.side < 1) throw ContractError("compute_j: window side must be >= 1");
    const WindowBounds b = clip_window(window.center_x, window.center_y, window.side, map.width, map.height);
    if (b.x0 > b.x1 || b.y0 > b.y1) throw ContractError("compute_j: window does not intersect the map");
    if ((b.x1 - b.x0 + 1) * (b.y1 - b.y0 + 1) < 2) throw ContractError("compute_j: window holds fewer than 2 pixels");
    ClassAccumulator acc(map.class_count());
    for (int y = b.y0; y <= b.y1; ++y)
        for (int x = b.x0; x <= b.x1; ++x)
            acc.add(map.at(x, y), x - window.center_x, y - window.center_y);
    return acc.j_value();
}

std::vector<double> j_map(const ColorClassMap& map, int side) {
    if (side < 3 || side % 2 == 0) throw ContractError("j_map: window side must be odd and >= 3");
    std::vector<double> out(static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height));
    ClassAccumulator acc(map.class_count());
    for (int cy = 0; cy < map.height; ++cy) {
        for (int cx = 0; cx < map.width; ++cx) {
            const WindowBounds b = clip_window(cx, cy, side, map.width, map.height);
            for (int y = b.y0; y <= b.y1; ++y)
                for (int x = b.x0; x <= b.x1; ++x) acc.add(map.at(x, y), x - cx, y - cy);
            out[idx(cx, cy, map.width)] = acc.j_value();
        }
    }
    return out;
}

RegionMask segment(const RasterImage& image, const SegmenterConfig& cfg) {
    if (image.empty()) throw ContractError("segment: empty image");
    if (!(cfg.tm > 0.0)) throw ContractError("segment: tm must be > 0");
    if (cfg.window_sizes.empty()) throw ContractError("segment: at least one window size required");
    for (int s : cfg.window_sizes)
        if (s < 3 || s % 2 == 0) throw ContractError("segment: window sides must be odd and >= 3");

    const int W = image.width();
    const int H = image.height();
    const std::size_t P = image.pixel_count();
    const ColorClassMap classes = quantize_colors(image, cfg.tm, cfg.quantizer);

    // Seeds come from the coarsest window, growth order from the finest.
    const int coarse = *std::max_element(cfg.window_sizes.begin(), cfg.window_sizes.end());
    const int fine = *std::min_element(cfg.window_sizes.begin(), cfg.window_sizes.end());
    const std::vector<double> j_coarse = j_map(classes, coarse);
    const std::vector<double> j_fine = fine == coarse ? j_coarse : j_map(classes, fine);

    double threshold = 0.0;
    if (cfg.j_threshold) {
        threshold = *cfg.j_threshold;
    } else {
        const double mean = std::accumulate(j_coarse.begin(), j_coarse.end(), 0.0) / static_cast<double>(P);
        double var = 0.0;
        for (double j : j_coarse) var += (j - mean) * (j - mean);
        threshold = mean + cfg.j_threshold_stddevs * std::sqrt(var / static_cast<double>(P));
    }
    std::vector<char> seed(P, 0);
    bool any_seed = false;
    for (std::size_t p = 0; p < P; ++p) {
        seed[p] = j_coarse[p] < threshold;
        any_seed = any_seed || seed[p];
    }
    if (!any_seed) std::fill(seed.begin(), seed.end(), 1);  // flat J map: no spatial structure

    constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> label(P, kNone);
    std::uint32_t regions = 0;
    std::vector<std::size_t> stack;
    for (std::size_t p0 = 0; p0 < P; ++p0) {
        if (!seed[p0] || label[p0] != kNone) continue;
        label[p0] = regions;
        stack.push_back(p0);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(p % static_cast<std::size_t>(W));
            const int y = static_cast<int>(p / static_cast<std::size_t>(W));
            for (auto [dx, dy] : kNeighbours) {
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
                const std::size_t q = idx(nx, ny, W);
                if (seed[q] && label[q] == kNone) {
                    label[q] = regions;
                    stack.push_back(q);
                }
            }
        }
        ++regions;
    }

    std::vector<Lab> pixel_lab(P);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) pixel_lab[idx(x, y, W)] = to_lab(image.at(x, y));

    std::vector<Lab> seed_mean(regions);
    std::vector<double> seed_n(regions, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        if (label[p] == kNone) continue;
        auto& m = seed_mean[label[p]];
        m.l += pixel_lab[p].l;
        m.a += pixel_lab[p].a;
        m.b += pixel_lab[p].b;
        seed_n[label[p]] += 1.0;
    }
    for (std::uint32_t r = 0; r < regions; ++r)
        seed_mean[r] = {seed_mean[r].l / seed_n[r], seed_mean[r].a / seed_n[r], seed_mean[r].b / seed_n[r]};

    // Grow: unlabelled pixels join an adjacent region in ascending-J order,
    // choosing the neighbour whose seed colour is closest.
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    std::vector<char> queued(P, 0);
    auto enqueue_neighbours = [&](std::size_t p) {
        const int x = static_cast<int>(p % static_cast<std::size_t>(W));
        const int y = static_cast<int>(p / static_cast<std::size_t>(W));
        for (auto [dx, dy] : kNeighbours) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
            const std::size_t q = idx(nx, ny, W);
            if (label[q] == kNone && !queued[q]) {
                queued[q] = 1;
                frontier.emplace(j_fine[q], q);
            }
        }
    };
    for (std::size_t p = 0; p < P; ++p)
        if (label[p] != kNone) enqueue_neighbours(p);
    while (!frontier.empty()) {
        const std::size_t p = frontier.top().second;
        frontier.pop();
        const int x = static_cast<int>(p % static_cast<std::size_t>(W));
        const int y = static_cast<int>(p / static_cast<std::size_t>(W));
        std::uint32_t best = kNone;
        double best_d = std::numeric_limits<double>::infinity();
        for (auto [dx, dy] : kNeighbours) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
            const std::uint32_t r = label[idx(nx, ny, W)];
            if (r == kNone) continue;
            const double d = lab_distance(pixel_lab[p], seed_mean[r]);
            if (d < best_d || (d == best_d && r < best)) {
                best_d = d;
                best = r;
            }
        }
        label[p] = best;
        enqueue_neighbours(p);
    }

    // Merge undersized regions into their most colour-similar neighbour, smallest first.
    std::vector<double> area(regions, 0.0);
    std::vector<Lab> sum(regions);
    for (std::size_t p = 0; p < P; ++p) {
        const auto r = label[p];
        area[r] += 1.0;
        sum[r].l += pixel_lab[p].l;
        sum[r].a += pixel_lab[p].a;
        sum[r].b += pixel_lab[p].b;
    }
    std::vector<std::set<std::uint32_t>> adjacent(regions);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const auto r = label[idx(x, y, W)];
            if (x + 1 < W && label[idx(x + 1, y, W)] != r) {
                adjacent[r].insert(label[idx(x + 1, y, W)]);
                adjacent[label[idx(x + 1, y, W)]].insert(r);
            }
            if (y + 1 < H && label[idx(x, y + 1, W)] != r) {
                adjacent[r].insert(label[idx(x, y + 1, W)]);
                adjacent[label[idx(x, y + 1, W)]].insert(r);
            }
        }
    }
    std::vector<std::uint32_t> parent(regions);
    std::iota(parent.begin(), parent.end(), 0u);
    std::vector<char> alive(regions, 1);
    auto mean_of = [&](std::uint32_t r) { return Lab{sum[r].l / area[r], sum[r].a / area[r], sum[r].b / area[r]}; };
    for (;;) {
        std::uint32_t victim = kNone;
        for (std::uint32_t r = 0; r < regions; ++r) {
            if (!alive[r] || area[r] >= cfg.min_region_px || adjacent[r].empty()) continue;
            if (victim == kNone || area[r] < area[victim]) victim = r;
        }
        if (victim == kNone) break;
        const Lab vm = mean_of(victim);
        std::uint32_t target = kNone;
        double best_d = std::numeric_limits<double>::infinity();
        for (auto nb : adjacent[victim]) {
            const double d = lab_distance(vm, mean_of(nb));
            if (d < best_d) {
                best_d = d;
                target = nb;
            }
        }
        area[target] += area[victim];
        sum[target].l += sum[victim].l;
        sum[target].a += sum[victim].a;
        sum[target].b += sum[victim].b;
        for (auto nb : adjacent[victim]) {
            adjacent[nb].erase(victim);
            if (nb != target) {
                adjacent[nb].insert(target);
                adjacent[target].insert(nb);
            }
        }
        adjacent[target].erase(target);
        adjacent[victim].clear();
        alive[victim] = 0;
        parent[victim] = target;
    }
    auto root = [&](std::uint32_t r) {
        while (parent[r] != r) r = parent[r];
        return r;
    };
    std::vector<std::uint32_t> raw(P);
    for (std::size_t p = 0; p < P; ++p) raw[p] = root(label[p]);
    return RegionMask::from_arbitrary_labels(W, H, raw);
}

}  // namespace scene
