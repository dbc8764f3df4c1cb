#include "spheresel/dataio.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace spheresel {

namespace {

using nlohmann::json;

// --- little-endian primitives over a byte buffer ---

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

void put_f64(std::string& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
public:
    Reader(const std::string& buf, const std::filesystem::path& path)
        : buf_(buf), path_(path) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i]))
                 << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i]))
                 << (8 * i);
        pos_ += 8;
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }

    void raw(char* dst, std::size_t n) {
        need(n);
        std::memcpy(dst, buf_.data() + pos_, n);
        pos_ += n;
    }

    std::size_t remaining() const { return buf_.size() - pos_; }

    void expect_end() const {
        if (pos_ != buf_.size())
            throw Error(ErrorCode::Truncated,
                        path_.string() + ": " + std::to_string(buf_.size() - pos_) +
                            " unexpected trailing bytes");
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > buf_.size())
            throw Error(ErrorCode::Truncated,
                        path_.string() + ": needs " + std::to_string(n) +
                            " more bytes at offset " + std::to_string(pos_));
    }

    const std::string& buf_;
    const std::filesystem::path& path_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
    std::string buf((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    if (in.bad())
        throw Error(ErrorCode::Io, "read failure on '" + path.string() + "'");
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& buf) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failure on '" + path.string() + "'");
}

void check_magic(Reader& r, const char* expected, const std::filesystem::path& path) {
    char magic[8];
    r.raw(magic, 8);
    if (std::memcmp(magic, expected, 8) != 0)
        throw Error(ErrorCode::BadMagic,
                    path.string() + ": expected magic '" + std::string(expected, 8) + "'");
}

void put_params(std::string& out, const MlpParams& p) {
    for (double v : p.w1) put_f64(out, v);
    for (double v : p.b1) put_f64(out, v);
    for (double v : p.w2) put_f64(out, v);
    for (double v : p.b2) put_f64(out, v);
}

void get_params(Reader& r, MlpParams& p) {
    for (double& v : p.w1) v = r.f64();
    for (double& v : p.b1) v = r.f64();
    for (double& v : p.w2) v = r.f64();
    for (double& v : p.b2) v = r.f64();
}

constexpr char kHeadMagic[9] = "SPHSHD01";
constexpr char kClusterMagic[9] = "SPHSCM01";

}  // namespace

FeatureMatrix read_features(const std::filesystem::path& path) {
    const std::string buf = read_file(path);
    Reader r(buf, path);
    check_magic(r, kFeatureMagic, path);
    FeatureMatrix m;
    m.rows = r.u32();
    m.cols = r.u32();
    const std::size_t expected = 16 + 4ull * m.rows * m.cols;
    if (buf.size() != expected)
        throw Error(ErrorCode::Truncated,
                    path.string() + ": length " + std::to_string(buf.size()) +
                        ", expected " + std::to_string(expected));
    m.data.resize(static_cast<std::size_t>(m.rows) * m.cols);
    for (float& v : m.data) {
        v = r.f32();
        if (!std::isfinite(v))
            throw Error(ErrorCode::NonFinite,
                        path.string() + ": non-finite payload value");
    }
    r.expect_end();
    return m;
}

void write_features(const FeatureMatrix& matrix, const std::filesystem::path& path) {
    if (matrix.cols == 0)
        throw Error(ErrorCode::InvalidConfig, "feature files require dimension >= 1");
    if (matrix.data.size() != static_cast<std::size_t>(matrix.rows) * matrix.cols)
        throw Error(ErrorCode::DimensionMismatch, "matrix storage size mismatch");
    for (float v : matrix.data)
        if (!std::isfinite(v))
            throw Error(ErrorCode::NonFinite, "refusing to write non-finite feature");
    std::string buf;
    buf.reserve(16 + 4ull * matrix.rows * matrix.cols);
    buf.append(kFeatureMagic, 8);
    put_u32(buf, matrix.rows);
    put_u32(buf, matrix.cols);
    for (float v : matrix.data) put_f32(buf, v);
    write_file(path, buf);
}

SampleManifest load_manifest(const std::filesystem::path& path,
                             std::uint32_t feature_rows) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
    SampleManifest manifest;
    try {
        const json& samples = doc.at("samples");
        for (const json& item : samples) {
            Sample s;
            s.id = item.at("id").get<std::string>();
            s.domain = item.at("domain").get<std::string>();
            s.feature_row = item.at("feature_row").get<std::uint32_t>();
            if (item.contains("recon_row") && !item["recon_row"].is_null())
                s.recon_row = item["recon_row"].get<std::uint32_t>();
            if (item.contains("label") && !item["label"].is_null())
                s.label = parse_label(item["label"].get<std::string>());
            manifest.samples.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
    manifest.validate(feature_rows);
    return manifest;
}

void save_manifest(const SampleManifest& manifest, const std::filesystem::path& path) {
    json samples = json::array();
    for (const Sample& s : manifest.samples) {
        json item;
        item["id"] = s.id;
        item["domain"] = s.domain;
        item["feature_row"] = s.feature_row;
        if (s.recon_row) item["recon_row"] = *s.recon_row;
        if (s.label) item["label"] = label_name(*s.label);
        samples.push_back(std::move(item));
    }
    json doc;
    doc["samples"] = std::move(samples);
    write_file(path, doc.dump(2) + "\n");
}

void save_head_checkpoint(const TrainedHead& head, const std::filesystem::path& path) {
    std::string buf;
    buf.append(kHeadMagic, 8);
    put_u32(buf, static_cast<std::uint32_t>(head.student.input_dim));
    put_u32(buf, static_cast<std::uint32_t>(head.student.hidden_dim));
    put_u32(buf, static_cast<std::uint32_t>(head.student.output_dim));
    const TrainerConfig& cfg = head.config;
    put_u64(buf, cfg.epochs);
    put_f64(buf, cfg.learning_rate);
    put_f64(buf, cfg.lr_floor);
    put_u64(buf, cfg.batch_size);
    put_f64(buf, cfg.ema_momentum);
    put_u64(buf, cfg.seed);
    put_f64(buf, cfg.loss.m);
    put_f64(buf, cfg.loss.eps_clamp);
    put_u64(buf, head.loss_history.size());
    for (double v : head.loss_history) put_f64(buf, v);
    put_params(buf, head.student);
    put_params(buf, head.teacher);
    write_file(path, buf);
}

TrainedHead load_head_checkpoint(const std::filesystem::path& path,
                                 std::optional<std::size_t> expect_embed_dim) {
    const std::string buf = read_file(path);
    Reader r(buf, path);
    check_magic(r, kHeadMagic, path);
    const std::uint32_t input_dim = r.u32();
    const std::uint32_t hidden_dim = r.u32();
    const std::uint32_t output_dim = r.u32();
    if (expect_embed_dim && output_dim != *expect_embed_dim)
        throw Error(ErrorCode::CheckpointMismatch,
                    path.string() + ": checkpoint d_embed " + std::to_string(output_dim) +
                        ", configured " + std::to_string(*expect_embed_dim));
    TrainedHead head;
    head.config.epochs = r.u64();
    head.config.learning_rate = r.f64();
    head.config.lr_floor = r.f64();
    head.config.batch_size = r.u64();
    head.config.ema_momentum = r.f64();
    head.config.seed = r.u64();
    head.config.hidden_dim = hidden_dim;
    head.config.embed_dim = output_dim;
    head.config.loss.m = r.f64();
    head.config.loss.eps_clamp = r.f64();
    head.loss_history.resize(r.u64());
    for (double& v : head.loss_history) v = r.f64();
    head.student = MlpParams::zeros(input_dim, hidden_dim, output_dim);
    head.teacher = MlpParams::zeros(input_dim, hidden_dim, output_dim);
    get_params(r, head.student);
    get_params(r, head.teacher);
    r.expect_end();
    head.student.validate();
    head.teacher.validate();
    return head;
}

void save_cluster_checkpoint(const ClusterModel& model,
                             const std::filesystem::path& path) {
    std::string buf;
    buf.append(kClusterMagic, 8);
    put_u32(buf, static_cast<std::uint32_t>(model.k));
    put_u32(buf, static_cast<std::uint32_t>(model.dim));
    put_u64(buf, model.assignments.size());
    put_u64(buf, model.seed);
    for (double v : model.centroids) put_f64(buf, v);
    for (std::uint32_t a : model.assignments) put_u32(buf, a);
    put_u64(buf, model.objective_history.size());
    for (double v : model.objective_history) put_f64(buf, v);
    write_file(path, buf);
}

ClusterModel load_cluster_checkpoint(const std::filesystem::path& path,
                                     std::optional<std::size_t> expect_dim) {
    const std::string buf = read_file(path);
    Reader r(buf, path);
    check_magic(r, kClusterMagic, path);
    ClusterModel model;
    model.k = r.u32();
    model.dim = r.u32();
    if (expect_dim && model.dim != *expect_dim)
        throw Error(ErrorCode::CheckpointMismatch,
                    path.string() + ": checkpoint dim " + std::to_string(model.dim) +
                        ", configured " + std::to_string(*expect_dim));
    const std::uint64_t count = r.u64();
    model.seed = r.u64();
    model.centroids.resize(model.k * model.dim);
    for (double& v : model.centroids) v = r.f64();
    model.assignments.resize(count);
    for (std::uint32_t& a : model.assignments) {
        a = r.u32();
        if (a >= model.k)
            throw Error(ErrorCode::Parse,
                        path.string() + ": assignment index out of range");
    }
    model.objective_history.resize(r.u64());
    for (double& v : model.objective_history) v = r.f64();
    r.expect_end();
    return model;
}

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

}  // namespace spheresel
