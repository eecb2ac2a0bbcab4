#pragma once

// Command-line front end: encode, decode, attack, eval, probe, keycheck.
//
// Settings come from an optional config document (--config, name = value,
// paths relative to the config file) and are overridden by flags (paths
// relative to the working directory).
//
// Exit codes: 0 ok, 1 other failure, 2 capacity, 3 key/header, 4 I/O, 5 config.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sd2/sd2.hpp"

namespace sd2::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kCapacity = 2,
    kKeyOrHeader = 3,
    kIo = 4,
    kConfig = 5,
};

inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::CapacityExceeded: return kCapacity;
    case ErrorKind::InvalidKey:
    case ErrorKind::Domain:
    case ErrorKind::MalformedHeader:
    case ErrorKind::UnknownKind: return kKeyOrHeader;
    case ErrorKind::Io: return kIo;
    case ErrorKind::Config:
    case ErrorKind::InvalidPlan:
    case ErrorKind::InvalidSchedule: return kConfig;
    default: return kFailure;
    }
}

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level_from_env() {
    const char* v = std::getenv("SD2_LOG");
    if (!v) return LogLevel::Warn;
    const std::string s(v);
    if (s == "error" || s == "quiet") return LogLevel::Error;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

class Logger {
public:
    explicit Logger(std::ostream& err) : err_(err), level_(log_level_from_env()) {}

    void log(LogLevel lvl, const std::string& msg) const {
        static const char* names[] = {"error", "warn", "info", "debug"};
        if (lvl <= level_) err_ << "sd2 [" << names[static_cast<int>(lvl)] << "] " << msg << "\n";
    }
    void warn(const std::string& m) const { log(LogLevel::Warn, m); }
    void info(const std::string& m) const { log(LogLevel::Info, m); }

private:
    std::ostream& err_;
    LogLevel level_;
};

inline std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::Io, "sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

inline std::string sha256_hex(std::string_view text) {
    return sha256_hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// Config values overlaid by command-line flags.
class Settings {
public:
    void load_config(const std::string& path) {
        config_ = TextMap::load(path);
        base_ = std::filesystem::path(path).parent_path();
    }

    void set_flag(const std::string& name, std::string value) { flags_[name] = std::move(value); }

    std::optional<std::string> get(const std::string& name) const {
        if (auto it = flags_.find(name); it != flags_.end()) return it->second;
        return config_.get(name);
    }

    std::string require(const std::string& name) const {
        auto v = get(name);
        if (!v) throw Error(ErrorKind::Config, "missing setting '" + name + "' (flag or config)");
        return *v;
    }

    std::string get_or(const std::string& name, const std::string& fallback) const {
        auto v = get(name);
        return v ? *v : fallback;
    }

    std::optional<std::string> path(const std::string& name) const {
        if (auto it = flags_.find(name); it != flags_.end()) return it->second;
        auto v = config_.get(name);
        if (!v) return std::nullopt;
        std::filesystem::path p(*v);
        return p.is_absolute() || base_.empty() ? p.string() : (base_ / p).string();
    }

    std::string require_path(const std::string& name) const {
        auto v = path(name);
        if (!v) throw Error(ErrorKind::Config, "missing path '" + name + "' (flag or config)");
        return *v;
    }

    /// Value as written (config-relative paths are not resolved); for manifests.
    std::string raw(const std::string& name) const { return get_or(name, ""); }

private:
    TextMap config_;
    std::filesystem::path base_;
    std::map<std::string, std::string> flags_;
};

inline std::string read_text(const std::string& path) {
    auto bytes = read_file(path);
    return std::string(bytes.begin(), bytes.end());
}

inline ChaosKey load_key(const Settings& s) { return parse_key(TextMap::load(s.require_path("key"))); }

inline BitPlan load_plan(const Settings& s) {
    if (auto p = s.path("plan")) return parse_plan(TextMap::load(*p));
    return BitPlan{};
}

inline ScheduleConfig load_schedule(const Settings& s) {
    ScheduleConfig c;
    if (auto v = s.get("schedule.steps")) c.steps = parse_int<int>(*v, "schedule.steps");
    if (auto v = s.get("schedule.beta_start")) c.beta_start = parse_double(*v, "schedule.beta_start");
    if (auto v = s.get("schedule.beta_end")) c.beta_end = parse_double(*v, "schedule.beta_end");
    if (auto v = s.get("schedule.sigma_mode")) c.sigma_mode = parse_sigma_mode(*v);
    return c;
}

inline DenoiserSpec load_denoiser(const Settings& s) {
    if (auto p = s.path("denoiser")) return parse_denoiser_spec(TextMap::load(*p));
    return DenoiserSpec{};
}

inline CarrierShape load_shape(const Settings& s) {
    CarrierShape shape;
    if (auto v = s.get("height")) shape.height = parse_int<std::size_t>(*v, "height");
    if (auto v = s.get("width")) shape.width = parse_int<std::size_t>(*v, "width");
    if (shape.height == 0 || shape.width == 0) throw Error(ErrorKind::Config, "carrier dimensions must be positive");
    return shape;
}

inline std::uint64_t load_seed(const Settings& s) { return parse_int<std::uint64_t>(s.get_or("seed", "0"), "seed"); }

inline Payload load_payload(const Settings& s) {
    const std::string file = s.require_path("payload");
    Payload p;
    p.kind = parse_payload_kind(s.get_or("payload_kind", "raw"));
    if (p.kind == PayloadKind::GrayImage) {
        const Image img = read_pgm(file);
        p.meta = {static_cast<std::uint32_t>(img.width), static_cast<std::uint32_t>(img.height)};
        p.body = img.pixels;
    } else {
        p.body = read_file(file);
    }
    return p;
}

inline void write_payload(const std::string& path, const Payload& p) {
    if (p.kind == PayloadKind::GrayImage) {
        Image img(p.meta.height, p.meta.width, 1);
        img.pixels = p.body;
        write_pgm(path, img);
    } else {
        write_file(path, p.body);
    }
}

inline std::string format_metric(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

inline nlohmann::ordered_json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

/// Emits key=value text, or the JSON document with --json; optionally also
/// writes the JSON document to --report.
struct Report {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, std::string>> lines;

    void add(const std::string& key, double v) {
        lines.emplace_back(key, format_metric(v));
        set_json(key, json_number(v));
    }
    void add(const std::string& key, const std::string& v) {
        lines.emplace_back(key, v);
        set_json(key, v);
    }
    void add(const std::string& key, const char* v) { add(key, std::string(v)); }
    void add(const std::string& key, bool v) {
        lines.emplace_back(key, v ? "true" : "false");
        set_json(key, v);
    }
    void add(const std::string& key, std::size_t v) {
        lines.emplace_back(key, std::to_string(v));
        set_json(key, v);
    }

    void emit(std::ostream& out, bool json) const {
        if (json) {
            out << doc.dump(2) << "\n";
        } else {
            for (const auto& [k, v] : lines) out << k << "=" << v << "\n";
        }
    }

private:
    // Dotted keys nest in the JSON document.
    void set_json(const std::string& key, nlohmann::ordered_json v) {
        nlohmann::ordered_json* node = &doc;
        std::size_t start = 0;
        for (auto dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
            node = &(*node)[key.substr(start, dot - start)];
            start = dot + 1;
        }
        (*node)[key.substr(start)] = std::move(v);
    }
};

inline void finish_report(const Report& r, const Settings& s, std::ostream& out) {
    r.emit(out, s.get_or("json", "false") == "true");
    if (auto p = s.get("report")) write_file(*p, r.doc.dump(2) + "\n");
}

// --------------------------------------------------------------------------

inline int cmd_encode(const Settings& s, std::ostream& out, const Logger& log) {
    const ChaosKey key = load_key(s);
    const BitPlan plan = load_plan(s);
    const ScheduleConfig sched_cfg = load_schedule(s);
    const NoiseSchedule schedule = build_schedule(sched_cfg);
    const DenoiserSpec den_spec = load_denoiser(s);
    const AnyDenoiser den = make_denoiser(den_spec, schedule);
    const CarrierShape shape = load_shape(s);
    const std::uint64_t seed = load_seed(s);
    const std::string out_path = s.require_path("out");
    Payload payload = load_payload(s);

    const auto diag = diagnose_sequence(generate_sequence(key, 4096));
    if (diag.degenerate)
        log.warn("key produces a low-entropy chaotic orbit (entropy " + format_metric(diag.byte_entropy_bits) +
                 " bits); the cipher will be weak");

    const std::string payload_digest = sha256_hex(payload.body);
    const std::size_t payload_bytes = payload.body.size();
    const PayloadKind kind = payload.kind;
    log.info("encoding " + std::to_string(payload_bytes) + " bytes into a " + std::to_string(shape.height) + "x" +
             std::to_string(shape.width) + " carrier, capacity " +
             std::to_string(plan.capacity_bytes(shape.height, shape.width)) + " bytes");

    const StegoImage img = generate_stego(key, std::move(payload), den, schedule, plan, seed, shape);
    const auto png = encode_png(img);
    write_file(out_path, png);

    nlohmann::ordered_json m;
    m["tool"] = "sd2";
    m["version"] = kToolVersion;
    m["key"] = {{"path", s.raw("key")}, {"sha256", sha256_hex(serialize_key(key))}};
    m["plan"] = {{"path", s.raw("plan")}, {"sha256", sha256_hex(serialize_plan(plan))}};
    nlohmann::ordered_json den_json = {{"kind", den_spec.kind}};
    if (den_spec.kind != "zero") {
        den_json["mean"] = den_spec.mean;
        den_json["var"] = den_spec.var;
    }
    m["denoiser"] = den_json;
    m["schedule"] = {{"steps", sched_cfg.steps},
                     {"beta_start", format_double(sched_cfg.beta_start)},
                     {"beta_end", format_double(sched_cfg.beta_end)},
                     {"sigma_mode", to_string(sched_cfg.sigma_mode)}};
    m["seed"] = seed;
    m["carrier"] = {{"height", shape.height}, {"width", shape.width}};
    m["payload"] = {{"path", s.raw("payload")}, {"kind", to_string(kind)}, {"bytes", payload_bytes},
                    {"sha256", payload_digest}};
    m["output"] = {{"path", s.raw("out")}, {"sha256", sha256_hex(png)}};
    // Fixed unless SOURCE_DATE_EPOCH is set, so reruns stay byte-identical.
    const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
    m["timestamps"] = {{"created", epoch ? parse_int<std::uint64_t>(epoch, "SOURCE_DATE_EPOCH") : 0}};
    const std::string manifest_path = s.path("manifest").value_or(out_path + ".manifest.json");
    write_file(manifest_path, m.dump(2) + "\n");

    Report r;
    r.add("status", "ok");
    r.add("output", out_path);
    r.add("manifest", manifest_path);
    r.add("capacity_bytes", plan.capacity_bytes(shape.height, shape.width));
    r.add("payload_bytes", payload_bytes);
    const auto b = bpp(plan, shape.height, shape.width);
    r.add("bpp_per_subpixel", b.per_subpixel);
    r.add("bpp_per_pixel", b.per_pixel);
    r.add("output_sha256", m["output"]["sha256"].get<std::string>());
    finish_report(r, s, out);
    return kOk;
}

inline int cmd_decode(const Settings& s, std::ostream& out, const Logger& log) {
    const StegoImage img = read_png(s.require_path("in"));
    const ChaosKey key = load_key(s);
    const BitPlan plan = load_plan(s);
    Report r;
    std::vector<std::uint8_t> recovered;
    if (auto raw = s.get("raw")) {
        std::size_t len = parse_int<std::size_t>(*raw, "raw");
        if (len == 0) len = plan.capacity_bytes(img.height, img.width) - kHeaderBytes;
        recovered = extract_raw(img, key, plan, len);
        if (auto o = s.path("out")) write_file(*o, recovered);
        r.add("mode", "raw");
        r.add("bytes", recovered.size());
    } else {
        const Payload p = extract_payload(img, key, plan);
        recovered = p.body;
        if (auto o = s.path("out")) write_payload(*o, p);
        r.add("mode", "framed");
        r.add("kind", to_string(p.kind));
        r.add("bytes", p.body.size());
        if (p.kind == PayloadKind::GrayImage) {
            r.add("width", std::size_t{p.meta.width});
            r.add("height", std::size_t{p.meta.height});
        }
    }
    if (auto truth_path = s.path("truth")) {
        std::vector<std::uint8_t> truth;
        if (s.get_or("payload_kind", "raw") == "gray") truth = read_pgm(*truth_path).pixels;
        else truth = read_file(*truth_path);
        if (truth.size() != recovered.size()) {
            log.warn("ground truth and recovered payload differ in length; scoring the common prefix");
            const std::size_t n = std::min(truth.size(), recovered.size());
            truth.resize(n);
            recovered.resize(n);
        }
        MetricReport m;
        m.set_accuracy(bit_accuracy(truth, recovered));
        r.add("acc", m.acc);
        r.add("bre", m.bre);
        r.add("byte_acc", byte_accuracy(truth, recovered));
    }
    finish_report(r, s, out);
    return kOk;
}

inline AttackSpec load_attack(const Settings& s) {
    AttackSpec a;
    const auto fill = parse_int<unsigned>(s.get_or("fill", "0"), "fill");
    if (fill > 255) throw Error(ErrorKind::Config, "fill must be a byte value");
    if (auto rect = s.get("rect")) {
        auto parts = split_list(*rect);
        if (parts.size() != 4) throw Error(ErrorKind::Config, "rect needs x,y,width,height");
        a = AttackSpec::crop_rect({parse_int<std::size_t>(parts[0], "rect"), parse_int<std::size_t>(parts[1], "rect"),
                                   parse_int<std::size_t>(parts[2], "rect"), parse_int<std::size_t>(parts[3], "rect")});
    } else {
        a = AttackSpec::crop_fraction(parse_double(s.get_or("fraction", "0.5"), "fraction"),
                                      parse_double(s.get_or("position", "0"), "position"));
    }
    a.fill = static_cast<std::uint8_t>(fill);
    return a;
}

inline int cmd_attack(const Settings& s, std::ostream& out, const Logger&) {
    const StegoImage img = read_png(s.require_path("in"));
    const AttackSpec attack = load_attack(s);
    const StegoImage damaged = apply_attack(img, attack);
    if (auto o = s.path("out")) write_png(*o, damaged);
    const Rect region = attack_region(attack, img.height, img.width);
    Report r;
    r.add("attack", attack.kind == AttackKind::CropRect ? "crop-rect" : "crop-fraction");
    r.add("region", std::to_string(region.x) + "," + std::to_string(region.y) + "," + std::to_string(region.width) +
                        "," + std::to_string(region.height));
    r.add("attacked_fraction",
          static_cast<double>(region.width * region.height) / static_cast<double>(img.width * img.height));
    if (auto truth_path = s.path("truth")) {
        const ChaosKey key = load_key(s);
        const BitPlan plan = load_plan(s);
        const auto truth = read_file(*truth_path);
        const auto rep = evaluate_robustness(img, attack, key, plan, truth);
        r.add("byte_acc", rep.byte_accuracy);
        r.add("corrupted_bytes", rep.corrupted_positions.size());
        r.add("dispersion_chi2", rep.dispersion.chi_square);
        r.add("dispersion_p", rep.dispersion.p_value);
    }
    finish_report(r, s, out);
    return kOk;
}

inline int cmd_eval(const Settings& s, std::ostream& out, const Logger&) {
    Report r;
    if (auto a_path = s.path("a")) {
        const Image a = read_png(*a_path);
        const Image b = read_png(s.require_path("b"));
        r.add("psnr_db", psnr(a, b));
        r.add("ssim", ssim(a, b));
    }
    if (s.path("plan") || s.get("height")) {
        const BitPlan plan = load_plan(s);
        const CarrierShape shape = load_shape(s);
        const auto b = bpp(plan, shape.height, shape.width);
        r.add("bpp_per_subpixel", b.per_subpixel);
        r.add("bpp_per_pixel", b.per_pixel);
        r.add("capacity_bytes", plan.capacity_bytes(shape.height, shape.width));
        r.add("usable_bytes", plan.capacity_bytes(shape.height, shape.width) - std::min(kHeaderBytes, plan.capacity_bytes(shape.height, shape.width)));
    }
    if (auto t = s.path("truth")) {
        const auto truth = read_file(*t);
        const auto rec = read_file(s.require_path("recovered"));
        if (truth.size() != rec.size()) throw Error(ErrorKind::LengthMismatch, "truth and recovered lengths differ");
        MetricReport m;
        m.set_accuracy(bit_accuracy(truth, rec));
        r.add("acc", m.acc);
        r.add("bre", m.bre);
    }
    finish_report(r, s, out);
    return kOk;
}

inline int cmd_probe(const Settings& s, std::ostream& out, const Logger&) {
    const ScheduleConfig sched_cfg = load_schedule(s);
    const NoiseSchedule schedule = build_schedule(sched_cfg);
    const AnyDenoiser den = make_denoiser(load_denoiser(s), schedule);
    DeltaSpec spec;
    spec.amplitude = parse_int<int>(s.get_or("amplitude", "15"), "amplitude");
    spec.density = parse_double(s.get_or("density", "0.05"), "density");
    const std::string kind = s.get_or("delta_kind", "uniform");
    if (kind == "uniform") spec.kind = DeltaKind::Uniform;
    else if (kind == "lsb4") spec.kind = DeltaKind::Lsb4;
    else throw Error(ErrorKind::Config, "unknown delta kind '" + kind + "'");
    const int k = parse_int<int>(s.get_or("k", "50"), "k");
    const int trials = parse_int<int>(s.get_or("trials", "8"), "trials");
    CarrierShape shape{16, 16};
    if (s.get("height") || s.get("width")) shape = load_shape(s);
    const auto rep = perturbation_probe(den, schedule, k, spec, trials, load_seed(s), shape);
    Report r;
    r.add("k", std::size_t(k));
    r.add("trials", std::size_t(trials));
    r.add("lipschitz", rep.lipschitz);
    r.add("mean_final_dist", rep.mean_final_dist);
    r.add("max_delta_units", rep.max_delta_units);
    r.add("bound_holds", rep.bound_holds);
    finish_report(r, s, out);
    return kOk;
}

inline int cmd_keycheck(const Settings& s, std::ostream& out, const Logger& log) {
    const ChaosKey key = load_key(s);
    const std::size_t n = parse_int<std::size_t>(s.get_or("samples", "4096"), "samples");
    const auto diag = diagnose_sequence(generate_sequence(key, n));
    if (diag.degenerate) log.warn("key produces a low-entropy chaotic orbit");
    const double bits = key_space_bits(1e-14, {0.0, 10.0}, {0.0, 1.0}, ChaosKey::kKMax - ChaosKey::kKMin + 1);
    Report r;
    r.add("mu", format_double(key.mu));
    r.add("r", format_double(key.x0));
    r.add("k", std::size_t(key.k));
    r.add("variant", to_string(key.variant));
    r.add("burn_in", key.burn_in);
    r.add("key_sha256", sha256_hex(serialize_key(key)));
    r.add("entropy_bits", diag.byte_entropy_bits);
    r.add("distinct_bytes", diag.distinct_bytes);
    r.add("longest_repeat", diag.longest_repeat);
    r.add("degenerate", diag.degenerate);
    r.add("key_space_bits", bits);
    r.add("key_space_claimed_bits", 139.0);
    r.add("key_space_matches_claim", bits >= 139.0);
    finish_report(r, s, out);
    return diag.degenerate ? kKeyOrHeader : kOk;
}

// --------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"sd2: chaos-keyed bit locking inside diffusion sampling"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Settings settings;
    std::map<std::string, std::string> flags;
    std::string config_path;

    auto add = [&flags](CLI::App* sub, const std::string& flag, const std::string& name, const std::string& help) {
        sub->add_option_function<std::string>(flag, [&flags, name](const std::string& v) { flags[name] = v; }, help);
    };
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "settings document (name = value)");
        add(sub, "--seed", "seed", "RNG seed");
        add(sub, "--out", "out", "output path");
        sub->add_flag_callback("--json", [&flags] { flags["json"] = "true"; }, "print the report as JSON");
        add(sub, "--report", "report", "also write the JSON report here");
    };
    auto keyed = [&](CLI::App* sub) {
        add(sub, "--key", "key", "key file");
        add(sub, "--plan", "plan", "bit plan file");
    };
    auto sampler = [&](CLI::App* sub) {
        add(sub, "--denoiser", "denoiser", "denoiser description file");
        add(sub, "--steps", "schedule.steps", "reverse steps T");
        add(sub, "--beta-start", "schedule.beta_start", "first beta");
        add(sub, "--beta-end", "schedule.beta_end", "last beta");
        add(sub, "--sigma-mode", "schedule.sigma_mode", "beta-tilde | beta | zero");
        add(sub, "--height", "height", "carrier height");
        add(sub, "--width", "width", "carrier width");
    };

    auto* encode = app.add_subcommand("encode", "hide a payload in a freshly sampled carrier");
    common(encode);
    keyed(encode);
    sampler(encode);
    add(encode, "--payload", "payload", "payload file");
    add(encode, "--payload-kind", "payload_kind", "gray | text | audio | raw");
    add(encode, "--manifest", "manifest", "run manifest path (default: <out>.manifest.json)");

    auto* decode = app.add_subcommand("decode", "recover a payload from a carrier");
    common(decode);
    keyed(decode);
    add(decode, "--in", "in", "stego PNG");
    add(decode, "--truth", "truth", "ground-truth payload for scoring");
    add(decode, "--payload-kind", "payload_kind", "kind of the truth file (gray reads PGM)");
    add(decode, "--raw", "raw", "skip header checks and return this many body bytes (0 = all)");

    auto* attack = app.add_subcommand("attack", "crop a carrier and optionally score recovery");
    common(attack);
    keyed(attack);
    add(attack, "--in", "in", "stego PNG");
    add(attack, "--fraction", "fraction", "share of columns to overwrite");
    add(attack, "--position", "position", "band offset in [0, 1]");
    add(attack, "--rect", "rect", "explicit rectangle x,y,width,height");
    add(attack, "--fill", "fill", "fill byte");
    add(attack, "--truth", "truth", "raw payload body for scoring");

    auto* eval = app.add_subcommand("eval", "image quality, capacity and accuracy metrics");
    common(eval);
    add(eval, "--a", "a", "first PNG");
    add(eval, "--b", "b", "second PNG");
    add(eval, "--plan", "plan", "bit plan file");
    add(eval, "--height", "height", "carrier height");
    add(eval, "--width", "width", "carrier width");
    add(eval, "--truth", "truth", "ground-truth payload");
    add(eval, "--recovered", "recovered", "recovered payload");

    auto* probe = app.add_subcommand("probe", "trajectory perturbation probe");
    common(probe);
    sampler(probe);
    add(probe, "--k", "k", "perturbed timestep");
    add(probe, "--trials", "trials", "paired trajectories");
    add(probe, "--amplitude", "amplitude", "max |delta| in quantized units (<= 15)");
    add(probe, "--density", "density", "share of elements perturbed");
    add(probe, "--delta-kind", "delta_kind", "uniform | lsb4");

    auto* keycheck = app.add_subcommand("keycheck", "validate a key and report orbit diagnostics");
    common(keycheck);
    add(keycheck, "--key", "key", "key file");
    add(keycheck, "--samples", "samples", "sequence length to diagnose");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kConfig;
    }

    const Logger log(err);
    try {
        if (!config_path.empty()) settings.load_config(config_path);
        for (auto& [k, v] : flags) settings.set_flag(k, v);
        if (*encode) return cmd_encode(settings, out, log);
        if (*decode) return cmd_decode(settings, out, log);
        if (*attack) return cmd_attack(settings, out, log);
        if (*eval) return cmd_eval(settings, out, log);
        if (*probe) return cmd_probe(settings, out, log);
        if (*keycheck) return cmd_keycheck(settings, out, log);
    } catch (const Error& e) {
        err << "error class=" << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error class=internal: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}

} // namespace sd2::cli
