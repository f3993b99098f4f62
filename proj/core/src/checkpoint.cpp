#include "uq/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "uq/error.hpp"

namespace uq {

namespace {

constexpr char kMagic[8] = {'U', 'Q', 'K', 'N', 'E', 'T', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_f64s(std::ostream& out, const std::vector<double>& v) {
    for (double x : v) put_f64(out, x);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint8_t get_u8(std::istream& in) {
    char c = 0;
    in.get(c);
    return static_cast<std::uint8_t>(c);
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::vector<double> get_f64s(std::istream& in, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = get_f64(in);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write checkpoint '" + path + "'");
    }
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, ckpt.loss_kind);
    put_f64(out, ckpt.model.dropout_rate);
    put_f64(out, ckpt.tau);
    put_f64(out, ckpt.beta);
    put_u64(out, ckpt.seed);
    put_u32(out, static_cast<std::uint32_t>(ckpt.model.class_count));
    put_u32(out, static_cast<std::uint32_t>(ckpt.model.layers.size()));
    for (const Layer& layer : ckpt.model.layers) {
        put_u32(out, static_cast<std::uint32_t>(layer.weights.rows()));
        put_u32(out, static_cast<std::uint32_t>(layer.weights.cols()));
        put_f64s(out, layer.weights.data());
        put_f64s(out, layer.bias);
    }
    const bool vos = ckpt.vos.has_value() && ckpt.vos->gaussians_ready();
    put_u8(out, vos ? 1 : 0);
    if (vos) {
        const VosState& state = *ckpt.vos;
        const std::size_t d = state.class_gaussians.front().dim();
        put_u32(out, static_cast<std::uint32_t>(d));
        put_u32(out, static_cast<std::uint32_t>(state.config.warmup_epochs));
        put_f64(out, state.config.epsilon);
        put_u32(out, static_cast<std::uint32_t>(state.config.candidates));
        put_u64(out, state.config.bank_capacity);
        put_f64(out, state.config.running_mean_momentum);
        put_f64(out, state.config.energy_floor);
        for (std::size_t c = 0; c < state.class_gaussians.size(); ++c) {
            put_f64s(out, state.class_gaussians[c].mean);
            put_f64s(out, state.class_gaussians[c].covariance.data());
            put_f64(out, state.running_energy_mean[c]);
            put_u8(out, state.mean_seen[c] ? 1 : 0);
        }
    }
    if (!out) {
        throw ParseError("short write on checkpoint '" + path + "'");
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open checkpoint '" + path + "'");
    }
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ParseError("'" + path + "' is not a UQKNET01 checkpoint");
    }
    Checkpoint ckpt;
    ckpt.loss_kind = get_u32(in);
    ckpt.model.dropout_rate = get_f64(in);
    ckpt.tau = get_f64(in);
    ckpt.beta = get_f64(in);
    ckpt.seed = get_u64(in);
    ckpt.model.class_count = static_cast<int>(get_u32(in));
    const std::uint32_t n_layers = get_u32(in);
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const std::uint32_t rows = get_u32(in);
        const std::uint32_t cols = get_u32(in);
        Layer layer;
        layer.weights = Matrix(rows, cols, get_f64s(in, static_cast<std::size_t>(rows) * cols));
        layer.bias = get_f64s(in, rows);
        ckpt.model.layers.push_back(std::move(layer));
    }
    if (get_u8(in) == 1) {
        const std::uint32_t d = get_u32(in);
        VosConfig cfg;
        cfg.warmup_epochs = static_cast<int>(get_u32(in));
        cfg.epsilon = get_f64(in);
        cfg.candidates = static_cast<int>(get_u32(in));
        cfg.bank_capacity = get_u64(in);
        cfg.running_mean_momentum = get_f64(in);
        cfg.energy_floor = get_f64(in);
        VosState state(ckpt.model.class_count, cfg);
        for (int c = 0; c < ckpt.model.class_count; ++c) {
            std::vector<double> mean = get_f64s(in, d);
            Matrix cov(d, d, get_f64s(in, static_cast<std::size_t>(d) * d));
            // The stored covariance was already regularized; refactorizing
            // adds another (tiny) ridge, which is harmless for scoring.
            state.class_gaussians.push_back(make_gaussian(std::move(mean), cov));
            state.running_energy_mean[c] = get_f64(in);
            state.mean_seen[c] = get_u8(in) == 1;
        }
        ckpt.vos = std::move(state);
    }
    if (!in) {
        throw ParseError("checkpoint '" + path + "' is truncated");
    }
    return ckpt;
}

}  // namespace uq
