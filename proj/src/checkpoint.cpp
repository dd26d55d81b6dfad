#include "stim/checkpoint.hpp"

#include <cstdint>
#include <fstream>

namespace stim {

namespace {

constexpr char kMagic[9] = "STIMCKPT";  // 8 bytes written, no terminator

void write_u64(std::ofstream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t read_u64(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

nlohmann::json read_header(std::ifstream& in, const std::string& path) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != std::string(kMagic, 8))
        throw DataError(path + ": not a STIM checkpoint");
    const std::uint64_t len = read_u64(in);
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError(path + ": truncated checkpoint header");
    nlohmann::json j = nlohmann::json::parse(header, nullptr, false);
    if (j.is_discarded()) throw DataError(path + ": malformed checkpoint header");
    if (j.value("format_version", -1) != kCheckpointFormatVersion)
        throw DataError(path + ": unsupported checkpoint format version");
    return j;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& config) {
    nlohmann::json header;
    header["format_version"] = kCheckpointFormatVersion;
    header["config"] = config;
    header["params"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const std::string& p : params.paths()) {
        const Tensor& t = params.get(p)->value;
        header["params"].push_back({{"path", p},
                                    {"shape", t.shape},
                                    {"offset", offset}});
        offset += t.size() * sizeof(double);
    }
    const std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 8);
    write_u64(out, hs.size());
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const std::string& p : params.paths()) {
        const Tensor& t = params.get(p)->value;
        // Little-endian payload; the targets this runs on are little-endian.
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!out) throw DataError("failed writing checkpoint: " + path);
}

nlohmann::json load_checkpoint(const std::string& path, ParamStore& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    nlohmann::json header = read_header(in, path);
    const std::streampos payload_start = in.tellg();

    std::size_t loaded = 0;
    for (const auto& entry : header.at("params")) {
        const std::string ppath = entry.at("path").get<std::string>();
        if (!params.contains(ppath))
            throw DataError(path + ": checkpoint parameter " + ppath +
                            " not present in model");
        VarPtr p = params.get(ppath);
        const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
        if (shape != p->value.shape)
            throw DataError(path + ": shape mismatch for " + ppath);
        in.seekg(payload_start +
                 static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
        in.read(reinterpret_cast<char*>(p->value.data.data()),
                static_cast<std::streamsize>(p->value.size() * sizeof(double)));
        if (!in) throw DataError(path + ": truncated payload for " + ppath);
        ++loaded;
    }
    if (loaded != params.paths().size())
        throw DataError(path + ": checkpoint missing parameters (" +
                        std::to_string(loaded) + " of " +
                        std::to_string(params.paths().size()) + ")");
    return header.at("config");
}

nlohmann::json read_checkpoint_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    return read_header(in, path).at("config");
}

}  // namespace stim
