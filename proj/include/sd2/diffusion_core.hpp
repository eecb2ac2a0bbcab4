#pragma once

// DDPM reverse process: noise schedule, denoiser contract, the single reverse
// update, and a sampling loop with a per-step hook.
//
// Timesteps are 1-based: t = T is the pure-noise end, x_0 the output.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sd2/error.hpp"
#include "sd2/rng.hpp"
#include "sd2/text_map.hpp"

namespace sd2 {

/// H x W x C real tensor, channel-interleaved (HWC) like the pixel buffers.
struct Latent {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> data;

    Latent() = default;
    Latent(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
        : height(h), width(w), channels(c), data(h * w * c, fill) {}

    std::size_t size() const noexcept { return data.size(); }
    bool same_shape(const Latent& o) const noexcept {
        return height == o.height && width == o.width && channels == o.channels;
    }
    double& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * channels + c]; }
    double at(std::size_t y, std::size_t x, std::size_t c) const { return data[(y * width + x) * channels + c]; }

    bool all_finite() const noexcept {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

enum class SigmaMode { BetaTilde, Beta, Zero };

inline SigmaMode parse_sigma_mode(std::string_view name) {
    if (name == "beta-tilde" || name == "BetaTilde") return SigmaMode::BetaTilde;
    if (name == "beta" || name == "Beta") return SigmaMode::Beta;
    if (name == "zero" || name == "Zero") return SigmaMode::Zero;
    throw Error(ErrorKind::Config, "unknown sigma mode '" + std::string(name) + "'");
}

inline const char* to_string(SigmaMode m) {
    switch (m) {
    case SigmaMode::BetaTilde: return "beta-tilde";
    case SigmaMode::Beta: return "beta";
    case SigmaMode::Zero: return "zero";
    }
    return "unknown";
}

struct NoiseSchedule {
    std::vector<double> beta;       // beta[t - 1]
    std::vector<double> alpha;      // 1 - beta
    std::vector<double> alpha_bar;  // running product of alpha
    std::vector<double> sigma;      // per-step noise scale

    int steps() const noexcept { return static_cast<int>(beta.size()); }

    double beta_at(int t) const { return beta[static_cast<std::size_t>(t - 1)]; }
    double alpha_at(int t) const { return alpha[static_cast<std::size_t>(t - 1)]; }
    double alpha_bar_at(int t) const { return t == 0 ? 1.0 : alpha_bar[static_cast<std::size_t>(t - 1)]; }
    double sigma_at(int t) const { return sigma[static_cast<std::size_t>(t - 1)]; }
};

struct ScheduleConfig {
    int steps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    SigmaMode sigma_mode = SigmaMode::BetaTilde;
};

inline void fill_sigma(NoiseSchedule& s, SigmaMode mode) {
    s.sigma.assign(s.beta.size(), 0.0);
    for (int t = 1; t <= s.steps(); ++t) {
        double var = 0.0;
        switch (mode) {
        case SigmaMode::BetaTilde:
            var = (1.0 - s.alpha_bar_at(t - 1)) / (1.0 - s.alpha_bar_at(t)) * s.beta_at(t);
            break;
        case SigmaMode::Beta: var = s.beta_at(t); break;
        case SigmaMode::Zero: var = 0.0; break;
        }
        s.sigma[static_cast<std::size_t>(t - 1)] = std::sqrt(var);
    }
}

/// Linear beta ramp from beta_start (t = 1) to beta_end (t = T).
inline NoiseSchedule build_schedule(int steps, double beta_start, double beta_end,
                                    SigmaMode sigma_mode = SigmaMode::BetaTilde) {
    if (steps < 1) throw Error(ErrorKind::InvalidSchedule, "schedule needs at least one step");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw Error(ErrorKind::InvalidSchedule, "require 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    const auto n = static_cast<std::size_t>(steps);
    s.beta.resize(n);
    s.alpha.resize(n);
    s.alpha_bar.resize(n);
    double running = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        s.beta[i] = beta_start + (beta_end - beta_start) * frac;
        s.alpha[i] = 1.0 - s.beta[i];
        running *= s.alpha[i];
        s.alpha_bar[i] = running;
    }
    fill_sigma(s, sigma_mode);
    return s;
}

inline NoiseSchedule build_schedule(const ScheduleConfig& c) {
    return build_schedule(c.steps, c.beta_start, c.beta_end, c.sigma_mode);
}

/// eps(x, t) -> noise prediction of identical shape; deterministic.
template <typename D>
concept Denoiser = requires(const D& d, const Latent& x, int t) {
    { d(x, t) } -> std::convertible_to<Latent>;
};

/// Exact minimum-MSE epsilon predictor when x_0 ~ N(mean_c, var_c) elementwise.
struct AnalyticGaussianDenoiser {
    std::vector<double> mean;  // per channel
    std::vector<double> var;   // per channel, > 0
    const NoiseSchedule* schedule = nullptr;

    AnalyticGaussianDenoiser(std::vector<double> m, std::vector<double> v, const NoiseSchedule& s)
        : mean(std::move(m)), var(std::move(v)), schedule(&s) {
        if (mean.empty() || mean.size() != var.size())
            throw Error(ErrorKind::Config, "analytic denoiser needs matching per-channel mean and var");
        for (double x : var)
            if (!(x > 0.0)) throw Error(ErrorKind::Config, "analytic denoiser variance must be positive");
    }

    Latent operator()(const Latent& x, int t) const;
};

/// eps = sqrt(1 - abar) (x - sqrt(abar) m) / (abar S^2 + 1 - abar)
inline Latent analytic_epsilon(const Latent& x, int t, const AnalyticGaussianDenoiser& d, const NoiseSchedule& s) {
    if (t < 1 || t > s.steps()) throw Error(ErrorKind::Range, "timestep out of range");
    const double abar = s.alpha_bar_at(t);
    const double sqrt_abar = std::sqrt(abar);
    const double sqrt_one_minus = std::sqrt(1.0 - abar);
    Latent eps(x.height, x.width, x.channels);
    const std::size_t nc = d.mean.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t c = nc == 1 ? 0 : (i % x.channels) % nc;
        eps.data[i] = sqrt_one_minus * (x.data[i] - sqrt_abar * d.mean[c]) / (abar * d.var[c] + 1.0 - abar);
    }
    return eps;
}

inline Latent AnalyticGaussianDenoiser::operator()(const Latent& x, int t) const {
    return analytic_epsilon(x, t, *this, *schedule);
}

/// Predicts zero noise everywhere; makes the reverse step a pure rescale.
struct ZeroDenoiser {
    Latent operator()(const Latent& x, int) const { return Latent(x.height, x.width, x.channels, 0.0); }
};

/// Runtime-selected denoiser (CLI, config files).
class AnyDenoiser {
public:
    template <Denoiser D>
    explicit AnyDenoiser(D d) : fn_([d = std::move(d)](const Latent& x, int t) { return Latent(d(x, t)); }) {}

    Latent operator()(const Latent& x, int t) const { return fn_(x, t); }

private:
    std::function<Latent(const Latent&, int)> fn_;
};

struct DenoiserSpec {
    std::string kind = "analytic-gaussian";
    std::vector<double> mean{0.0};
    std::vector<double> var{0.25};
};

inline DenoiserSpec parse_denoiser_spec(const TextMap& map) {
    DenoiserSpec spec;
    spec.kind = map.get_or("kind", "analytic-gaussian");
    if (spec.kind == "zero") return spec;
    if (spec.kind != "analytic-gaussian")
        throw Error(ErrorKind::Config, "unknown denoiser kind '" + spec.kind + "'");
    spec.mean.clear();
    spec.var.clear();
    for (const auto& s : split_list(map.require("mean"))) spec.mean.push_back(parse_double(s, "mean"));
    for (const auto& s : split_list(map.require("var"))) spec.var.push_back(parse_double(s, "var"));
    return spec;
}

inline AnyDenoiser make_denoiser(const DenoiserSpec& spec, const NoiseSchedule& s) {
    if (spec.kind == "zero") return AnyDenoiser(ZeroDenoiser{});
    return AnyDenoiser(AnalyticGaussianDenoiser(spec.mean, spec.var, s));
}

/// x_{t-1} = (x_t - (1 - alpha_t) / sqrt(1 - abar_t) * eps) / sqrt(alpha_t) + sigma_t z
inline Latent reverse_step(const Latent& x, int t, const Latent& eps, const NoiseSchedule& s, const Latent& z) {
    if (!x.same_shape(eps) || !x.same_shape(z))
        throw Error(ErrorKind::ShapeMismatch, "reverse_step: latent, prediction and noise shapes differ");
    if (t < 1 || t > s.steps()) throw Error(ErrorKind::Range, "timestep out of range");
    const double alpha = s.alpha_at(t);
    const double abar = s.alpha_bar_at(t);
    const double eps_coef = abar < 1.0 ? (1.0 - alpha) / std::sqrt(1.0 - abar) : 0.0;
    const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    const double sigma = s.sigma_at(t);
    Latent out(x.height, x.width, x.channels);
    for (std::size_t i = 0; i < x.size(); ++i)
        out.data[i] = inv_sqrt_alpha * (x.data[i] - eps_coef * eps.data[i]) + sigma * z.data[i];
    return out;
}

template <Denoiser D>
Latent reverse_step(const Latent& x, int t, const D& den, const NoiseSchedule& s, const Latent& z) {
    Latent eps = den(x, t);
    if (!eps.same_shape(x)) throw Error(ErrorKind::ShapeMismatch, "denoiser changed the latent shape");
    return reverse_step(x, t, eps, s, z);
}

/// Noise for reverse step t: stream t for t > 1, zeros at t = 1.
inline Latent step_noise(std::uint64_t seed, int t, std::size_t h, std::size_t w, std::size_t c) {
    Latent z(h, w, c);
    if (t > 1) CounterRng(seed, static_cast<std::uint64_t>(t)).fill_normal(z.data);
    return z;
}

inline Latent initial_noise(std::uint64_t seed, const NoiseSchedule& s, std::size_t h, std::size_t w, std::size_t c) {
    Latent x(h, w, c);
    CounterRng(seed, static_cast<std::uint64_t>(s.steps()) + 1).fill_normal(x.data);
    return x;
}

/// hook(x_prev, t) runs after each step t and may overwrite x_{t-1} in place.
using StepHook = std::function<void(Latent&, int)>;

/// Runs steps t = from_t .. to_t + 1 starting at x = x_{from_t}; returns x_{to_t}.
template <Denoiser D>
Latent sample_between(Latent x, int from_t, int to_t, const D& den, const NoiseSchedule& s, std::uint64_t seed,
                      const StepHook& hook = {}) {
    if (from_t < 0 || from_t > s.steps() || to_t < 0 || to_t > from_t)
        throw Error(ErrorKind::Range, "sampling range out of bounds");
    for (int t = from_t; t > to_t; --t) {
        const Latent z = step_noise(seed, t, x.height, x.width, x.channels);
        x = reverse_step(x, t, den, s, z);
        if (hook) hook(x, t);
        if (!x.all_finite()) throw Error(ErrorKind::Domain, "non-finite latent after step " + std::to_string(t));
    }
    return x;
}

/// Runs steps t = from_t .. 1; returns x_0.
template <Denoiser D>
Latent sample_from(Latent x, int from_t, const D& den, const NoiseSchedule& s, std::uint64_t seed,
                   const StepHook& hook = {}) {
    return sample_between(std::move(x), from_t, 0, den, s, seed, hook);
}

/// Full trajectory from x_T ~ N(0, I).
template <Denoiser D>
Latent sample(const D& den, const NoiseSchedule& s, std::uint64_t seed, std::size_t h, std::size_t w,
              std::size_t c, const StepHook& hook = {}) {
    return sample_from(initial_noise(seed, s, h, w, c), s.steps(), den, s, seed, hook);
}

} // namespace sd2
