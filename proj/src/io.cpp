#include "auxfm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "auxfm/error.hpp"
#include "auxfm/rng.hpp"

namespace auxfm {

namespace {

constexpr char kMagic[4] = {'A', 'X', 'F', 'M'};

class ByteWriter {
public:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes_.insert(bytes_.end(), b, b + n);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v = 0.0;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw IoError("checkpoint ends unexpectedly");
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::uint32_t activation_tag(Activation a) { return a == Activation::tanh ? 0u : 1u; }

Activation activation_from_tag(std::uint32_t tag) {
    if (tag == 0) return Activation::tanh;
    if (tag == 1) return Activation::silu;
    throw IoError("checkpoint has unknown activation tag " + std::to_string(tag));
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("failed while writing " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// ---------------------------------------------------------------------------
// Config value parsing.

struct Located {
    std::string value;
    std::size_t line = 0;
};

class ConfigReader {
public:
    ConfigReader(std::map<std::string, Located> entries, std::string source)
        : entries_(std::move(entries)), source_(std::move(source)) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const {
        const auto it = entries_.find(key);
        const std::string where = it == entries_.end() ? source_ : source_ + ":" + std::to_string(it->second.line);
        throw DomainError(where + ": " + key + " " + why);
    }

    template <class T>
    void integer(const std::string& key, T& out, long long min_value = 0) {
        const auto it = seen(key);
        if (it == entries_.end()) return;
        const std::string& s = it->second.value;
        long long v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) fail(key, "expects an integer, got '" + s + "'");
        if (v < min_value) fail(key, "must be >= " + std::to_string(min_value) + ", got " + s);
        out = static_cast<T>(v);
    }

    void real(const std::string& key, double& out) {
        const auto it = seen(key);
        if (it == entries_.end()) return;
        out = parse_real(key, it->second.value);
    }

    void boolean(const std::string& key, bool& out) {
        const auto it = seen(key);
        if (it == entries_.end()) return;
        const std::string& s = it->second.value;
        if (s == "true" || s == "1" || s == "yes") {
            out = true;
        } else if (s == "false" || s == "0" || s == "no") {
            out = false;
        } else {
            fail(key, "expects true or false, got '" + s + "'");
        }
    }

    void text(const std::string& key, std::string& out) {
        const auto it = seen(key);
        if (it != entries_.end()) out = it->second.value;
    }

    std::vector<double> real_list(const std::string& key, std::vector<double> fallback) {
        const auto it = seen(key);
        if (it == entries_.end()) return fallback;
        std::vector<double> out;
        for (const std::string& part : split_csv_line(it->second.value)) out.push_back(parse_real(key, trim(part)));
        return out;
    }

    std::vector<std::size_t> size_list(const std::string& key, std::vector<std::size_t> fallback) {
        const auto it = seen(key);
        if (it == entries_.end()) return fallback;
        std::vector<std::size_t> out;
        for (const std::string& raw : split_csv_line(it->second.value)) {
            const std::string part = trim(raw);
            long long v = 0;
            const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
            if (ec != std::errc() || p != part.data() + part.size() || v <= 0) {
                fail(key, "expects a comma-separated list of positive integers, got '" + it->second.value + "'");
            }
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    }

    double parse_real(const std::string& key, const std::string& s) const {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
            fail(key, "expects a finite number, got '" + s + "'");
        }
        return v;
    }

    template <class Fn>
    auto guarded(const std::string& key, Fn&& fn) -> decltype(fn()) {
        try {
            return fn();
        } catch (const Error& e) {
            fail(key, std::string("is invalid: ") + e.what());
        }
    }

    std::vector<std::string> defaulted() const {
        std::vector<std::string> out;
        for (const std::string& key : config_keys()) {
            if (!entries_.count(key)) out.push_back(key);
        }
        return out;
    }

private:
    std::map<std::string, Located>::const_iterator seen(const std::string& key) const { return entries_.find(key); }

    std::map<std::string, Located> entries_;
    std::string source_;
};

AuxSpec base_aux(const std::string& kind, const aux::Gaussian& g, const aux::Uniform& u, const aux::Laplace& l,
                 aux::X0Map map) {
    if (kind == "zero") return AuxSpec::zero();
    if (kind == "gaussian") return AuxSpec(g);
    if (kind == "uniform") return AuxSpec(u);
    if (kind == "laplace") return AuxSpec(l);
    if (kind == "rademacher") return AuxSpec::rademacher();
    if (kind == "x0_map") return AuxSpec::of_x0(map);
    throw DomainError("unknown aux kind '" + kind +
                      "' (expected zero, gaussian, uniform, laplace, rademacher, mixture or x0_map)");
}

AuxSpec read_aux(ConfigReader& r) {
    std::string kind = "zero";
    aux::Gaussian g;
    aux::Uniform u;
    aux::Laplace l;
    double scale = 1.0;
    std::string map_name = "identity";
    std::string mixture;
    r.text("aux.kind", kind);
    r.real("aux.sigma", g.sigma);
    r.real("aux.low", u.low);
    r.real("aux.high", u.high);
    r.real("aux.loc", l.loc);
    r.real("aux.laplace_scale", l.scale);
    r.real("aux.scale", scale);
    r.text("aux.map", map_name);
    r.text("aux.mixture", mixture);
    const aux::X0Map map = r.guarded("aux.map", [&] { return x0_map_from_string(map_name); });

    if (kind != "mixture") {
        if (r.has("aux.mixture")) r.fail("aux.mixture", "is only valid with aux.kind = mixture");
        return r.guarded("aux.kind", [&] { return base_aux(kind, g, u, l, map).with_scale(scale); });
    }
    if (mixture.empty()) r.fail("aux.mixture", "is required when aux.kind = mixture (e.g. gaussian:0.5, rademacher:0.5)");
    std::vector<AuxSpec> components;
    std::vector<double> weights;
    for (const std::string& raw : split_csv_line(mixture)) {
        const std::string item = trim(raw);
        const auto colon = item.find(':');
        if (colon == std::string::npos) r.fail("aux.mixture", "entries must look like kind:weight, got '" + item + "'");
        const std::string comp = trim(item.substr(0, colon));
        if (comp == "mixture") r.fail("aux.mixture", "cannot nest mixtures");
        components.push_back(r.guarded("aux.mixture", [&] { return base_aux(comp, g, u, l, map); }));
        weights.push_back(r.parse_real("aux.mixture", trim(item.substr(colon + 1))));
    }
    return r.guarded("aux.mixture", [&] { return AuxSpec::mixture(components, weights).with_scale(scale); });
}

NetShape read_shape(ConfigReader& r, const std::string& hidden_key, const std::string& act_key, NetShape shape) {
    shape.hidden = r.size_list(hidden_key, shape.hidden);
    std::string act = to_string(shape.activation);
    r.text(act_key, act);
    shape.activation = r.guarded(act_key, [&] { return activation_from_string(act); });
    return shape;
}

}  // namespace

// ---------------------------------------------------------------------------
// Checkpoints

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    ByteWriter w;
    w.raw(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(ckpt.kind));
    const auto& dims = ckpt.net.layer_dims();
    w.u32(static_cast<std::uint32_t>(dims.size()));
    for (std::size_t d : dims) w.u32(static_cast<std::uint32_t>(d));
    w.u32(activation_tag(ckpt.net.activation()));
    const std::vector<double> flat = ckpt.net.params().flatten();
    w.u64(flat.size());
    for (double v : flat) w.f64(v);
    w.u64(fnv1a(w.bytes()));
    return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < sizeof kMagic || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
        throw IoError("not a checkpoint (bad magic)");
    }
    if (bytes.size() < sizeof kMagic + 8) throw IoError("checkpoint checksum mismatch (file truncated)");
    const auto body = bytes.first(bytes.size() - 8);
    ByteReader tail(bytes.subspan(bytes.size() - 8));
    if (tail.u64() != fnv1a(body)) throw IoError("checkpoint checksum mismatch (file truncated or corrupted)");

    ByteReader r(body);
    r.u32();  // magic
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw IoError("unsupported checkpoint version " + std::to_string(version) + " (this build reads version " +
                      std::to_string(kCheckpointVersion) + ")");
    }
    const std::uint32_t kind = r.u32();
    if (kind > 1) throw IoError("checkpoint has unknown model kind " + std::to_string(kind));
    const std::uint32_t n = r.u32();
    if (n < 2 || n > 64) throw IoError("checkpoint has implausible layer count " + std::to_string(n));
    std::vector<std::size_t> dims(n);
    for (auto& d : dims) {
        d = r.u32();
        if (d == 0) throw IoError("checkpoint has a zero-width layer");
    }
    const Activation act = activation_from_tag(r.u32());
    Checkpoint ckpt{static_cast<ModelKind>(kind), Mlp(dims, act)};
    const std::uint64_t count = r.u64();
    if (count != ckpt.net.parameter_count()) {
        throw IoError("checkpoint parameter count " + std::to_string(count) + " does not match its layer dims");
    }
    if (r.remaining() != count * 8) throw IoError("checkpoint payload size does not match its parameter count");
    std::vector<double> flat(count);
    for (auto& v : flat) v = r.f64();
    ckpt.net.params().assign_flat(flat);
    return ckpt;
}

namespace {

void save_net(ModelKind kind, const Mlp& net, const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = encode_checkpoint(Checkpoint{kind, net});
    std::ofstream out = open_out(path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    finish(out, path);
}

}  // namespace

void save_checkpoint(const VelocityModel& model, const std::filesystem::path& path) {
    save_net(ModelKind::velocity, model.net(), path);
}

void save_checkpoint(const PrototypeModel& model, const std::filesystem::path& path) {
    save_net(ModelKind::prototype, model.net(), path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_binary_file(path);
    try {
        return decode_checkpoint(bytes);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

VelocityModel load_velocity(const std::filesystem::path& path, std::size_t dim) {
    Checkpoint ckpt = load_checkpoint(path);
    if (ckpt.kind != ModelKind::velocity) throw IoError(path.string() + " holds a prototype model, not a velocity model");
    if (ckpt.net.output_dim() != dim || ckpt.net.input_dim() < dim + 1) {
        throw ShapeError(path.string() + ": velocity net " + std::to_string(ckpt.net.input_dim()) + " -> " +
                         std::to_string(ckpt.net.output_dim()) + " does not fit data dim " + std::to_string(dim));
    }
    const std::size_t classes = ckpt.net.input_dim() - dim - 1;
    return VelocityModel(std::move(ckpt.net), dim, classes);
}

PrototypeModel load_prototype(const std::filesystem::path& path) {
    Checkpoint ckpt = load_checkpoint(path);
    if (ckpt.kind != ModelKind::prototype) throw IoError(path.string() + " holds a velocity model, not a prototype");
    const std::size_t classes = ckpt.net.input_dim() - 1;
    return PrototypeModel(std::move(ckpt.net), classes);
}

// ---------------------------------------------------------------------------
// Config

LabeledDataset DatasetSpec::build() const {
    RngStream rng = RngStream(seed).split("dataset");
    if (kind == "ring") return make_ring(num_modes, n_per_mode, jitter, rng);
    if (kind == "bimodal") return make_bimodal_ring(separation, jitter, n, rng);
    if (kind == "point") return make_point(point, std::max<std::size_t>(n_per_mode, 1));
    throw DomainError("unknown dataset kind '" + kind + "' (expected ring, bimodal or point)");
}

void RunConfig::build_dataset() { train.dataset = dataset.build(); }

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "path.schedule",
        "aux.kind",
        "aux.sigma",
        "aux.low",
        "aux.high",
        "aux.loc",
        "aux.laplace_scale",
        "aux.scale",
        "aux.map",
        "aux.mixture",
        "train.mode",
        "train.steps",
        "train.batch",
        "train.lr",
        "train.seed",
        "train.prototype_steps",
        "train.null_dropout",
        "train.base_sigma",
        "train.hidden",
        "train.activation",
        "train.prototype_hidden",
        "train.label_conditioned",
        "sample.steps",
        "sample.batch",
        "sample.seed",
        "sample.guidance",
        "sample.record_trajectory",
        "sample.base_sigma",
        "dataset.kind",
        "dataset.K",
        "dataset.n_per_mode",
        "dataset.jitter",
        "dataset.seed",
        "dataset.separation",
        "dataset.n",
        "dataset.point",
    };
    return keys;
}

RunConfig parse_config(std::string_view text, const std::string& source) {
    const std::set<std::string> known(config_keys().begin(), config_keys().end());
    std::map<std::string, Located> entries;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string body = trim(line);
        if (body.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const std::string where = source + ":" + std::to_string(line_no);
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw DomainError(where + ": expected 'key = value', got '" + body + "'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw DomainError(where + ": missing key before '='");
        if (!known.count(key)) throw DomainError(where + ": unknown key '" + key + "'");
        if (value.empty()) throw DomainError(where + ": " + key + " has an empty value");
        if (entries.count(key)) {
            throw DomainError(where + ": duplicate key '" + key + "' (first set on line " +
                              std::to_string(entries[key].line) + ")");
        }
        entries[key] = Located{value, line_no};
        if (end == text.size()) break;
    }

    ConfigReader r(std::move(entries), source);
    RunConfig cfg;

    std::string schedule = "linear_bump";
    r.text("path.schedule", schedule);
    cfg.train.schedule = r.guarded("path.schedule", [&] { return PathSchedule::from_name(schedule); });
    cfg.sample.schedule = cfg.train.schedule;

    cfg.train.aux = read_aux(r);

    std::string mode = to_string(cfg.train.mode);
    r.text("train.mode", mode);
    cfg.train.mode = r.guarded("train.mode", [&] { return train_mode_from_string(mode); });
    r.integer("train.steps", cfg.train.steps);
    r.integer("train.batch", cfg.train.batch, 1);
    r.real("train.lr", cfg.train.learning_rate);
    if (!(cfg.train.learning_rate > 0.0)) r.fail("train.lr", "must be positive");
    r.integer("train.seed", cfg.train.seed);
    r.integer("train.prototype_steps", cfg.train.prototype_steps);
    r.real("train.null_dropout", cfg.train.null_dropout);
    if (!(cfg.train.null_dropout >= 0.0 && cfg.train.null_dropout <= 1.0)) {
        r.fail("train.null_dropout", "must lie in [0, 1]");
    }
    r.real("train.base_sigma", cfg.train.base_sigma);
    if (!(cfg.train.base_sigma > 0.0)) r.fail("train.base_sigma", "must be positive");
    cfg.train.velocity_net = read_shape(r, "train.hidden", "train.activation", cfg.train.velocity_net);
    cfg.train.prototype_net.hidden = r.size_list("train.prototype_hidden", cfg.train.prototype_net.hidden);
    r.boolean("train.label_conditioned", cfg.train.label_conditioned);

    r.integer("sample.steps", cfg.sample.steps, 1);
    r.integer("sample.batch", cfg.sample.batch);
    r.integer("sample.seed", cfg.sample.seed);
    r.real("sample.guidance", cfg.sample.guidance);
    r.boolean("sample.record_trajectory", cfg.sample.record_trajectory);
    r.real("sample.base_sigma", cfg.sample.base_sigma);
    if (!(cfg.sample.base_sigma > 0.0)) r.fail("sample.base_sigma", "must be positive");
    if (!r.has("sample.base_sigma")) cfg.sample.base_sigma = cfg.train.base_sigma;

    r.text("dataset.kind", cfg.dataset.kind);
    if (cfg.dataset.kind != "ring" && cfg.dataset.kind != "bimodal" && cfg.dataset.kind != "point") {
        r.fail("dataset.kind", "must be ring, bimodal or point, got '" + cfg.dataset.kind + "'");
    }
    r.integer("dataset.K", cfg.dataset.num_modes, 1);
    r.integer("dataset.n_per_mode", cfg.dataset.n_per_mode, 1);
    r.real("dataset.jitter", cfg.dataset.jitter);
    if (!(cfg.dataset.jitter >= 0.0)) r.fail("dataset.jitter", "must be >= 0");
    r.integer("dataset.seed", cfg.dataset.seed);
    r.real("dataset.separation", cfg.dataset.separation);
    r.integer("dataset.n", cfg.dataset.n, 1);
    cfg.dataset.point = r.real_list("dataset.point", cfg.dataset.point);
    if (cfg.dataset.point.empty()) r.fail("dataset.point", "needs at least one coordinate");

    cfg.defaulted = r.defaulted();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, path.string());
}

// ---------------------------------------------------------------------------
// CSV

void write_samples_csv(const std::filesystem::path& path, const Tensor& samples, std::span<const int> labels) {
    if (!labels.empty() && labels.size() != samples.rows()) {
        throw ShapeError("write_samples_csv: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(samples.rows()) + " samples");
    }
    std::ofstream out = open_out(path);
    out << "sample_id,label";
    for (std::size_t c = 0; c < samples.cols(); ++c) out << ",x_" << c;
    out << '\n';
    for (std::size_t i = 0; i < samples.rows(); ++i) {
        out << i << ',' << (labels.empty() ? kNullLabel : labels[i]);
        for (std::size_t c = 0; c < samples.cols(); ++c) out << ',' << fmt17(samples(i, c));
        out << '\n';
    }
    finish(out, path);
}

LabeledSamples read_samples_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file (missing header)");
    const std::vector<std::string> header = split_csv_line(trim(line));
    if (header.size() < 3 || header[0] != "sample_id" || header[1] != "label") {
        throw IoError(path.string() + ": expected header sample_id,label,x_0,...");
    }
    const std::size_t d = header.size() - 2;
    std::vector<double> values;
    LabeledSamples out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(body);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != d + 2) throw IoError(where + ": expected " + std::to_string(d + 2) + " fields");
        int label = 0;
        const auto [p, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), label);
        if (ec != std::errc() || p != fields[1].data() + fields[1].size()) throw IoError(where + ": bad label");
        out.labels.push_back(label);
        for (std::size_t c = 0; c < d; ++c) {
            double v = 0.0;
            const std::string& f = fields[2 + c];
            const auto [q, ec2] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec2 != std::errc() || q != f.data() + f.size()) throw IoError(where + ": bad number '" + f + "'");
            values.push_back(v);
        }
    }
    out.points = Tensor(out.labels.size(), d, std::move(values));
    return out;
}

void write_loss_csv(const std::filesystem::path& path, std::span<const double> loss) {
    std::ofstream out = open_out(path);
    out << "step,loss\n";
    for (std::size_t i = 0; i < loss.size(); ++i) out << i << ',' << fmt17(loss[i]) << '\n';
    finish(out, path);
}

void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& ds) {
    std::ofstream out = open_out(path);
    out << "label";
    if (ds.dim() == 2) {
        out << ",x,y";
    } else {
        for (std::size_t c = 0; c < ds.dim(); ++c) out << ",x_" << c;
    }
    out << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << ds.labels[i];
        for (std::size_t c = 0; c < ds.dim(); ++c) out << ',' << fmt17(ds.points(i, c));
        out << '\n';
    }
    finish(out, path);
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows) {
    std::ofstream out = open_out(path);
    out << "metric,value\n";
    for (const auto& row : rows) out << row.name << ',' << fmt17(row.value) << '\n';
    finish(out, path);
}

void write_check_csv(const std::filesystem::path& path, std::span<const CheckRow> rows) {
    std::ofstream out = open_out(path);
    out << "check,value,threshold,pass\n";
    for (const auto& row : rows) {
        out << row.check << ',' << fmt17(row.value) << ',' << fmt17(row.threshold) << ','
            << (row.pass ? "true" : "false") << '\n';
    }
    finish(out, path);
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out = open_out(path);
    out << text;
    finish(out, path);
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace auxfm
