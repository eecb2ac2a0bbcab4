#pragma once

// Capacity, accuracy and image quality metrics, cropping attacks,
// key-sensitivity scans, key-space arithmetic and the trajectory
// perturbation probe.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sd2/chaos_keystream.hpp"
#include "sd2/diffusion_core.hpp"
#include "sd2/error.hpp"
#include "sd2/extractor.hpp"
#include "sd2/image.hpp"
#include "sd2/payload_codec.hpp"
#include "sd2/rng.hpp"
#include "sd2/stego_injector.hpp"

namespace sd2 {

// ---------------------------------------------------------------------------
// Accuracy and capacity

inline double bit_accuracy(const BitStream& truth, const BitStream& recovered) {
    if (truth.size() != recovered.size())
        throw Error(ErrorKind::LengthMismatch, "bit_accuracy: stream lengths differ");
    if (truth.size() == 0) return 1.0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) same += truth[i] == recovered[i];
    return static_cast<double>(same) / static_cast<double>(truth.size());
}

inline double bit_accuracy(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> recovered) {
    return bit_accuracy(bytes_to_bits(truth), bytes_to_bits(recovered));
}

inline double byte_accuracy(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> recovered) {
    if (truth.size() != recovered.size())
        throw Error(ErrorKind::LengthMismatch, "byte_accuracy: lengths differ");
    if (truth.empty()) return 1.0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) same += truth[i] == recovered[i];
    return static_cast<double>(same) / static_cast<double>(truth.size());
}

struct BppReport {
    double per_subpixel = 0.0;
    double per_pixel = 0.0;
};

inline BppReport bpp(const BitPlan& plan, std::size_t h, std::size_t w) {
    plan.validate();
    BppReport r;
    r.per_pixel = static_cast<double>(plan.capacity_bits(h, w)) / static_cast<double>(h * w);
    r.per_subpixel = r.per_pixel / 3.0;
    return r;
}

// ---------------------------------------------------------------------------
// Image quality

inline constexpr double kPeakValue = 255.0;

inline double mse(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw Error(ErrorKind::DimensionMismatch, "images differ in shape");
    if (a.size() == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

inline double psnr_from_mse(double m) {
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(kPeakValue * kPeakValue / m);
}

/// +infinity for identical images.
inline double psnr(const Image& a, const Image& b) { return psnr_from_mse(mse(a, b)); }

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double c1 = (0.01 * kPeakValue) * (0.01 * kPeakValue);
    double c2 = (0.03 * kPeakValue) * (0.03 * kPeakValue);
};

namespace ssim_detail {

inline double ssim_from_stats(double mu_a, double mu_b, double var_a, double var_b, double cov, const SsimParams& p) {
    return ((2.0 * mu_a * mu_b + p.c1) * (2.0 * cov + p.c2)) /
           ((mu_a * mu_a + mu_b * mu_b + p.c1) * (var_a + var_b + p.c2));
}

// One channel as doubles.
inline std::vector<double> plane(const Image& img, std::size_t c) {
    std::vector<double> out(img.height * img.width);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.pixels[i * img.channels + c];
    return out;
}

// Separable Gaussian filter, 'valid' region only.
inline std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                        const std::vector<double>& kernel) {
    const std::size_t k = kernel.size();
    const std::size_t ow = w - k + 1, oh = h - k + 1;
    std::vector<double> tmp(h * ow, 0.0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += kernel[i] * src[y * w + x + i];
            tmp[y * ow + x] = acc;
        }
    std::vector<double> out(oh * ow, 0.0);
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += kernel[i] * tmp[(y + i) * ow + x];
            out[y * ow + x] = acc;
        }
    return out;
}

inline double channel_ssim(const std::vector<double>& a, const std::vector<double>& b, std::size_t h, std::size_t w,
                           const SsimParams& p) {
    const auto win = static_cast<std::size_t>(p.window);
    if (h < win || w < win) {
        // Single global window with uniform weights.
        const double n = static_cast<double>(a.size());
        double ma = 0, mb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) { ma += a[i]; mb += b[i]; }
        ma /= n;
        mb /= n;
        double va = 0, vb = 0, cov = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            va += (a[i] - ma) * (a[i] - ma);
            vb += (b[i] - mb) * (b[i] - mb);
            cov += (a[i] - ma) * (b[i] - mb);
        }
        return ssim_from_stats(ma, mb, va / n, vb / n, cov / n, p);
    }
    std::vector<double> kernel(win);
    const double half = static_cast<double>(win - 1) / 2.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
        const double d = static_cast<double>(i) - half;
        kernel[i] = std::exp(-d * d / (2.0 * p.sigma * p.sigma));
        sum += kernel[i];
    }
    for (auto& v : kernel) v /= sum;

    std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto mu_a = filter_valid(a, h, w, kernel);
    const auto mu_b = filter_valid(b, h, w, kernel);
    const auto e_aa = filter_valid(aa, h, w, kernel);
    const auto e_bb = filter_valid(bb, h, w, kernel);
    const auto e_ab = filter_valid(ab, h, w, kernel);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double va = e_aa[i] - mu_a[i] * mu_a[i];
        const double vb = e_bb[i] - mu_b[i] * mu_b[i];
        const double cov = e_ab[i] - mu_a[i] * mu_b[i];
        total += ssim_from_stats(mu_a[i], mu_b[i], va, vb, cov, p);
    }
    return total / static_cast<double>(mu_a.size());
}

} // namespace ssim_detail

/// Mean local SSIM, averaged over channels.
inline double ssim(const Image& a, const Image& b, const SsimParams& p = {}) {
    if (!a.same_shape(b)) throw Error(ErrorKind::DimensionMismatch, "images differ in shape");
    if (a.size() == 0) throw Error(ErrorKind::DimensionMismatch, "empty image");
    double total = 0.0;
    for (std::size_t c = 0; c < a.channels; ++c)
        total += ssim_detail::channel_ssim(ssim_detail::plane(a, c), ssim_detail::plane(b, c), a.height, a.width, p);
    return total / static_cast<double>(a.channels);
}

struct MetricReport {
    double bpp_per_subpixel = 0.0;
    double bpp_per_pixel = 0.0;
    double acc = 1.0;
    double bre = 0.0;
    double psnr_db = std::numeric_limits<double>::infinity();
    double ssim = 1.0;

    void set_accuracy(double a) {
        acc = a;
        bre = 1.0 - a;
    }
};

// ---------------------------------------------------------------------------
// Attacks

struct Rect {
    std::size_t x = 0, y = 0, width = 0, height = 0;
};

enum class AttackKind { CropRect, CropFraction };

struct AttackSpec {
    AttackKind kind = AttackKind::CropFraction;
    Rect rect;              // CropRect
    double fraction = 0.0;  // CropFraction: full-height band covering this share of columns
    double position = 0.0;  // CropFraction: band offset in [0, 1], 0 = left edge
    std::uint8_t fill = 0;

    static AttackSpec crop_rect(Rect r, std::uint8_t fill = 0) {
        AttackSpec a;
        a.kind = AttackKind::CropRect;
        a.rect = r;
        a.fill = fill;
        return a;
    }
    static AttackSpec crop_fraction(double f, double position = 0.0, std::uint8_t fill = 0) {
        AttackSpec a;
        a.kind = AttackKind::CropFraction;
        a.fraction = f;
        a.position = position;
        a.fill = fill;
        return a;
    }
};

/// The pixel rectangle an attack overwrites on an h x w image.
inline Rect attack_region(const AttackSpec& a, std::size_t h, std::size_t w) {
    if (a.kind == AttackKind::CropRect) {
        if (a.rect.x + a.rect.width > w || a.rect.y + a.rect.height > h)
            throw Error(ErrorKind::DimensionMismatch, "crop rectangle exceeds the image");
        return a.rect;
    }
    if (!(a.fraction >= 0.0 && a.fraction <= 1.0)) throw Error(ErrorKind::Range, "crop fraction must lie in [0, 1]");
    if (!(a.position >= 0.0 && a.position <= 1.0)) throw Error(ErrorKind::Range, "crop position must lie in [0, 1]");
    const auto band = static_cast<std::size_t>(std::llround(a.fraction * static_cast<double>(w)));
    const auto x0 = static_cast<std::size_t>(std::llround(a.position * static_cast<double>(w - band)));
    return {x0, 0, band, h};
}

inline StegoImage apply_attack(const StegoImage& img, const AttackSpec& a) {
    const Rect r = attack_region(a, img.height, img.width);
    StegoImage out = img;
    for (std::size_t y = r.y; y < r.y + r.height; ++y)
        for (std::size_t x = r.x; x < r.x + r.width; ++x)
            for (std::size_t c = 0; c < img.channels; ++c) out.at(y, x, c) = a.fill;
    return out;
}

struct UniformityTest {
    double chi_square = 0.0;
    std::size_t bins = 0;
    std::size_t samples = 0;
    double p_value = 1.0;
};

/// Chi-square goodness of fit of positions in [0, n) against uniform, with
/// `bins` equal-width cells.
inline UniformityTest position_uniformity(std::span<const std::size_t> positions, std::size_t n, std::size_t bins = 32) {
    if (n == 0 || bins < 2) throw Error(ErrorKind::Range, "uniformity test needs n > 0 and at least 2 bins");
    bins = std::min(bins, n);
    UniformityTest r;
    r.bins = bins;
    r.samples = positions.size();
    if (positions.empty()) return r;
    std::vector<double> observed(bins, 0.0);
    for (auto p : positions) {
        if (p >= n) throw Error(ErrorKind::Range, "position outside [0, n)");
        observed[p * bins / n] += 1.0;
    }
    for (std::size_t b = 0; b < bins; ++b) {
        // cell b covers [ceil(b n / bins), ceil((b + 1) n / bins))
        const std::size_t lo = (b * n + bins - 1) / bins, hi = ((b + 1) * n + bins - 1) / bins;
        const double expected = static_cast<double>(positions.size()) * static_cast<double>(hi - lo) / static_cast<double>(n);
        if (expected > 0.0) r.chi_square += (observed[b] - expected) * (observed[b] - expected) / expected;
    }
    r.p_value = boost::math::gamma_q(static_cast<double>(bins - 1) / 2.0, r.chi_square / 2.0);
    return r;
}

struct RobustnessReport {
    double byte_accuracy = 0.0;
    double attacked_fraction = 0.0;  // share of pixels overwritten
    std::vector<std::size_t> corrupted_positions;
    UniformityTest dispersion;
};

/// Attacks the carrier, extracts raw body bytes and scores them against truth.
inline RobustnessReport evaluate_robustness(const StegoImage& img, const AttackSpec& attack, const ChaosKey& key,
                                            const BitPlan& plan, std::span<const std::uint8_t> truth) {
    const Rect r = attack_region(attack, img.height, img.width);
    const StegoImage damaged = apply_attack(img, attack);
    const auto recovered = extract_raw(damaged, key, plan, truth.size());
    RobustnessReport rep;
    rep.byte_accuracy = byte_accuracy(truth, recovered);
    rep.attacked_fraction = static_cast<double>(r.width * r.height) / static_cast<double>(img.height * img.width);
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] != recovered[i]) rep.corrupted_positions.push_back(i);
    rep.dispersion = position_uniformity(rep.corrupted_positions, truth.size());
    return rep;
}

// ---------------------------------------------------------------------------
// Keys

enum class KeyField { Mu, R };

struct KeyDelta {
    KeyField field = KeyField::Mu;
    double offset = 0.0;
};

struct KeySensitivityRow {
    KeyDelta delta;
    ChaosKey key;
    double byte_accuracy = 0.0;
};

inline ChaosKey perturb_key(ChaosKey key, const KeyDelta& d) {
    (d.field == KeyField::Mu ? key.mu : key.x0) += d.offset;
    key.validate();
    return key;
}

inline std::vector<KeySensitivityRow> key_sensitivity_scan(const ChaosKey& base, std::span<const KeyDelta> deltas,
                                                           const StegoImage& img, const BitPlan& plan,
                                                           std::span<const std::uint8_t> truth) {
    std::vector<KeySensitivityRow> rows;
    for (const auto& d : deltas) {
        KeySensitivityRow row;
        row.delta = d;
        row.key = perturb_key(base, d);
        row.byte_accuracy = byte_accuracy(truth, extract_raw(img, row.key, plan, truth.size()));
        rows.push_back(row);
    }
    return rows;
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double span() const noexcept { return hi - lo; }
};

/// log2 of the number of keys distinguishable at `precision`.
inline double key_space_bits(double precision, Interval mu, Interval r, int k_count) {
    if (!(precision > 0.0) || !(mu.span() > 0.0) || !(r.span() > 0.0) || k_count < 1)
        throw Error(ErrorKind::Range, "key space needs positive precision, ranges and k count");
    return std::log2(mu.span() / precision) + std::log2(r.span() / precision) + std::log2(static_cast<double>(k_count));
}

// ---------------------------------------------------------------------------
// Trajectory perturbation probe

enum class DeltaKind {
    Uniform,  // integer offsets drawn uniformly from [-amplitude, amplitude]
    Lsb4,     // replace the 4 low bits of the quantized value with random bits
};

struct DeltaSpec {
    DeltaKind kind = DeltaKind::Uniform;
    int amplitude = 15;     // quantized units, |delta| <= 15
    double density = 0.05;  // fraction of elements perturbed
};

struct ProbeReport {
    double lipschitz = 0.0;       // max over trials of |x0' - x0|_2 / |delta|_2
    double mean_final_dist = 0.0; // latent units
    double max_delta_units = 0.0; // max |delta|_inf in quantized units
    bool bound_holds = true;      // |x0' - x0|_2 <= lipschitz * |delta|_2 for every trial
    std::vector<double> ratios;
    std::vector<double> distances;
};

inline double l2_distance(const Latent& a, const Latent& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    return std::sqrt(acc);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t trial) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (trial + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Delta (latent units) for one trial; stream 0 of the trial seed is unused by the sampler.
inline Latent make_delta(const Latent& xk, const DeltaSpec& spec, std::uint64_t seed) {
    if (spec.amplitude < 0 || spec.amplitude > 15) throw Error(ErrorKind::Range, "delta amplitude must lie in [0, 15]");
    if (!(spec.density >= 0.0 && spec.density <= 1.0)) throw Error(ErrorKind::Range, "delta density must lie in [0, 1]");
    Latent d(xk.height, xk.width, xk.channels);
    const CounterRng rng(seed, 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto b = rng.block(i);
        if (CounterRng::to_unit(b[0], b[1]) > spec.density) continue;
        int units = 0;
        if (spec.kind == DeltaKind::Uniform) {
            const int span = 2 * spec.amplitude + 1;
            units = static_cast<int>(b[2] % static_cast<std::uint32_t>(span)) - spec.amplitude;
        } else {
            const int u = quantize_value(xk.data[i]);
            const int locked = (u & ~0x0F) | static_cast<int>(b[3] & 0x0Fu);
            units = locked - u;
        }
        d.data[i] = static_cast<double>(units) / 127.5;
    }
    return d;
}

/// Paired trajectories from x_k and x_k + delta with shared noise draws.
template <Denoiser D>
ProbeReport perturbation_probe(const D& den, const NoiseSchedule& s, int k, const DeltaSpec& spec, int trials,
                               std::uint64_t seed, CarrierShape shape = {16, 16}) {
    if (k < 1 || k > s.steps()) throw Error(ErrorKind::Range, "probe step k must lie in [1, T]");
    if (trials < 1) throw Error(ErrorKind::Range, "probe needs at least one trial");
    ProbeReport rep;
    double dist_sum = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t traj_seed = mix_seed(seed, static_cast<std::uint64_t>(trial));
        const Latent xk = sample_between(initial_noise(traj_seed, s, shape.height, shape.width, 3), s.steps(), k, den, s,
                                         traj_seed);
        const Latent delta = make_delta(xk, spec, traj_seed);
        Latent xk_perturbed = xk;
        double delta_norm = 0.0;
        for (std::size_t i = 0; i < xk.size(); ++i) {
            xk_perturbed.data[i] += delta.data[i];
            delta_norm += delta.data[i] * delta.data[i];
            rep.max_delta_units = std::max(rep.max_delta_units, std::abs(delta.data[i]) * 127.5);
        }
        delta_norm = std::sqrt(delta_norm);
        const Latent x0 = sample_from(xk, k, den, s, traj_seed);
        const Latent x0_perturbed = sample_from(xk_perturbed, k, den, s, traj_seed);
        const double dist = l2_distance(x0, x0_perturbed);
        const double ratio = delta_norm > 0.0 ? dist / delta_norm : 0.0;
        rep.ratios.push_back(ratio);
        rep.distances.push_back(dist);
        rep.lipschitz = std::max(rep.lipschitz, ratio);
        dist_sum += dist;
        if (delta_norm == 0.0 && dist != 0.0) rep.bound_holds = false;
    }
    rep.mean_final_dist = dist_sum / trials;
    for (std::size_t i = 0; i < rep.ratios.size(); ++i)
        if (rep.ratios[i] > rep.lipschitz) rep.bound_holds = false;
    rep.max_delta_units = std::round(rep.max_delta_units * 1e9) / 1e9;
    return rep;
}

} // namespace sd2
